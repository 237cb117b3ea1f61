#pragma once

#include "json.hpp"

#include "dyadlab/pl_function.hpp"
#include "dyadlab/profile.hpp"
#include "dyadlab/sigma.hpp"

namespace dyadlab {

// {"xs": [...], "ys": [...]} or {"slopes": [...]}.
PLFunction pl_from_json(const nlohmann::json& j);
nlohmann::json pl_to_json(const PLFunction& f);

// A number, or {"s": [...], "t": [...], "eta": [[...], ...]}.
EtaTable eta_from_json(const nlohmann::json& j);
nlohmann::json eta_to_json(const EtaTable& e);

// {"kind": "high_dim", "d": 3, "s": 1.2}, {"kind": "planar", "s": 0.3, "eta": 0.01},
// {"kind": "trivial_half"}, {"kind": "kaufman_identity", "d": 2, "s": 1},
// {"kind": "custom", "d": 2, "g": {pl}}.
Profile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const Profile& p);

nlohmann::json decomposition_to_json(const IntervalDecomposition& dec);
IntervalDecomposition decomposition_from_json(const nlohmann::json& j);

}  // namespace dyadlab
