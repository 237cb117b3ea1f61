#pragma once

#include <string>
#include <vector>

#include "dyadlab/measure.hpp"
#include "dyadlab/pl_function.hpp"

namespace dyadlab {

struct UniformPiece {
    int dim = 1;
    int depth = 0;
    int T = 1;
    std::vector<MortonKey> keys;  // retained level-depth cubes, sorted
    std::vector<int> exponents;   // T*beta_j, one per block
    std::vector<double> beta;
    double mass_retained = 0.0;   // mu(X) relative to the total mass of the input
    double mass_bound = 0.0;      // (2dT+2)^-l
    bool meets_bound = false;

    int blocks() const { return static_cast<int>(beta.size()); }
    std::vector<CubeRef> cubes() const;
};

// Restriction of mu to the leaves listed in `keys` (unnormalized).
DyadicMeasure restrict_to_keys(const DyadicMeasure& mu, const std::vector<MortonKey>& keys);

// Checks mu(Q) <= 2^-p_j mu(Qhat) <= 2 mu(Q) for every cube Q at level jT,
// using the cube sums stored in `restricted`. Empty string when it holds.
std::string check_uniform(const DyadicMeasure& restricted, int T, const std::vector<int>& exponents);

// Finds X with mu_X uniform. The blocks are processed from the finest one
// upward; at each block one exponent is chosen for all parents and each parent
// keeps its heaviest set of children whose ratios to the kept total all lie in
// [2^-p-1, 2^-p].
UniformPiece extract_uniform(const DyadicMeasure& mu, int T);

struct UniformDecomposition {
    std::vector<UniformPiece> pieces;
    double covered = 0.0;     // mu(union X_i)
    double eps = 0.0;
    double eps_prime = 0.0;   // eps + log2(2dT+2)/T
    bool covers = false;      // covered >= 1 - 2^-eps m
    bool pieces_heavy = false;  // every mu(X_i) >= 2^-eps' m
};

UniformDecomposition decompose_uniform(const DyadicMeasure& mu, int T, double eps);

// f(j/l) = (beta_1 + ... + beta_j) / l.
PLFunction branching_profile(const UniformPiece& piece);
PLFunction branching_profile(const std::vector<double>& beta);

// Keeps f on [4 sqrt(eps), 1] and replaces it by the chord from the origin below.
PLFunction lift_to_class(const PLFunction& f, double u, double eps, double d);

}  // namespace dyadlab
