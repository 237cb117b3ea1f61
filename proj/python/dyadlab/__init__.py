from ._dyadlab import *  # noqa: F401,F403
from ._dyadlab import Error, HypothesisViolated, InvalidArgument, ParseError  # noqa: F401
