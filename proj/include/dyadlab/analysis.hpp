#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dyadlab/measure.hpp"

namespace dyadlab {

// Masses below this are dropped from entropy sums.
inline constexpr double kEntropyFloor = 1e-300;

// Shannon entropy in bits of a finite mass vector (assumed to sum to 1).
double entropy_of_masses(std::span<const double> masses);

// H(mu, D_level). The trivial measure has entropy 0.
double entropy(const DyadicMeasure& mu, int level);

// Minimum entropy over probability vectors nu <= theta * masses. The minimizer
// fills the heaviest cells to their caps first.
double robust_entropy_of_masses(std::vector<double> masses, double theta);
double robust_entropy(const DyadicMeasure& mu, int level, double theta);

std::size_t box_count(const DyadicMeasure& mu, int level);
std::size_t box_count(std::span<const CubeRef> cubes, int dim, int level);

struct FrostmanFit {
    double s = 0.0;
    double C = 1.0;
    int level_lo = 0;
    int level_hi = 0;
    double delta_lo = 1.0;  // 2^-level_hi
    double delta_hi = 1.0;  // 2^-level_lo
    double residual = 0.0;  // bits
};

// Cube-based Frostman exponent over levels [level_lo, level_hi]. A least
// squares slope of -log2 max_Q mu(Q) against the level gives a first guess;
// it is then capped so that the constant stays within 2^budget_bits.
FrostmanFit frostman_fit(const DyadicMeasure& mu, int level_lo, int level_hi,
                         double budget_bits = 10.0);

struct RobustnessResult {
    bool robust = true;
    std::size_t min_count = 0;         // fewest cells with mass > r, 0 if none
    std::vector<std::size_t> witness;  // indices into the mass vector when not robust
};

// Greedy minimal covering count for mass > r, compared against 2^{level*s}.
RobustnessResult robustness_check_masses(std::span<const double> masses, int level, double s,
                                         double r);
RobustnessResult robustness_check(const DyadicMeasure& mu, int level, double s, double r);

// Truncated Riesz s-energy between leaf centers; same-leaf pairs sit at 2^-depth.
double riesz_energy(const DyadicMeasure& mu, double s);

double l2_density_norm(const DyadicMeasure& mu, int level);

std::vector<double> level_masses(const DyadicMeasure& mu, int level);

}  // namespace dyadlab
