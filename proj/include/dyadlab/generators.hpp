#pragma once

#include <cstdint>
#include <vector>

#include "dyadlab/geometry.hpp"
#include "dyadlab/measure.hpp"

namespace dyadlab {

// Self-similar product of the ratio 2^-k Cantor set (digits 0 and 2^k - 1 in
// base 2^k) in every coordinate. depth must be a multiple of k. Frostman
// exponent d/k; k = 1 is Lebesgue.
DyadicMeasure cantor_product(int k, int dim, int depth);

// Base-q digits (q = 2^g) restricted to {0, ..., 2^ceil(g/2) - 1} in every
// coordinate: the set sits near the lattice q^-n Z^d at every construction
// scale. Exponent d ceil(g/2)/g, so d/2 for even g; q = 2 is Lebesgue.
DyadicMeasure lattice_falconer(int q, int dim, int depth);

// 2^(delta/2) horizontal tracks of length 2^-(delta/2) and width 2^-delta,
// spaced 2^-(delta/2) apart. Below the track width the vertical coordinate
// carries the ratio 1/4 Cantor measure. delta must be even and < depth, and
// depth - delta even. tracks = 0 gives the trivial measure.
DyadicMeasure train_track(int delta, int depth, int tracks = -1);

// A x A for a one-dimensional A.
DyadicMeasure product_set(const DyadicMeasure& a);

// Arc-length measure on two circles of radius 0.18 centered at (0.22, 0.5)
// and (0.78, 0.5), sampled with 2^(depth+2) atoms per circle.
DyadicMeasure circle_pair(int depth);

// Self-similar planar measure with `digits` distinct base-4 digit pairs and
// random weights, drawn from `seed`. depth must be even.
DyadicMeasure random_digit_cantor(int digits, int depth, std::uint64_t seed);

// Cantor measure with contraction 2^(-1/s) on the angle interval [lo, hi),
// discretized on a 2-d direction grid of `cells` cells.
DirectionMeasure cantor_arc(int cells, double s, double lo, double hi);

// max over cells and radii r >= delta of rho(B(theta, r)) / r^s, with the
// ball measured in angle.
double arc_frostman_constant(const DirectionMeasure& rho, double s, double delta);

}  // namespace dyadlab
