#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "dyadlab/analysis.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/generators.hpp"
#include "dyadlab/sigma.hpp"
#include "dyadlab/uniformize.hpp"

using namespace dyadlab;

TEST_CASE("lebesgue and point mass are already uniform") {
    const auto leb = extract_uniform(cantor_product(1, 2, 8), 2);
    CHECK(leb.mass_retained == doctest::Approx(1.0));
    for (double b : leb.beta) CHECK(b == doctest::Approx(2.0));

    const DyadicMeasure pt = DyadicMeasure::from_leaves(2, 8, {{{17, 200, 0}, 1.0}});
    const auto p = extract_uniform(pt, 2);
    CHECK(p.mass_retained == doctest::Approx(1.0));
    for (double b : p.beta) CHECK(b == 0.0);
    CHECK_THROWS_AS(extract_uniform(cantor_product(1, 2, 8), 3), InvalidArgument);
}

TEST_CASE("random measures: two-sided inequality, mass bound, box sandwich") {
    std::mt19937_64 rng(2024);
    const int m = 8, T = 2, d = 2, l = m / T;
    const double bound = std::pow(2.0 * d * T + 2, -l);
    for (int seed = 0; seed < 100; ++seed) {
        const DyadicMeasure mu = build_from_atoms(oracle::random_atoms(rng, 200, d), d, m).normalized();
        const UniformPiece piece = extract_uniform(mu, T);
        CHECK(piece.blocks() == l);
        CHECK(piece.mass_bound == doctest::Approx(bound));
        CHECK(piece.mass_retained >= bound);
        const DyadicMeasure x = restrict_to_keys(mu, piece.keys);
        CHECK(oracle::uniform_violations(x, T, piece.exponents) == 0);
        CHECK(check_uniform(x, T, piece.exponents).empty());
        double acc = 0;
        for (int j = 1; j <= l; ++j) {
            acc += T * piece.beta[j - 1];
            const double n = static_cast<double>(oracle::box_count_direct(x, j * T));
            CHECK(std::exp2(acc) <= n * (1 + 1e-12));
            CHECK(n <= std::exp2(j + acc) * (1 + 1e-12));
        }
    }
}

TEST_CASE("decomposition covers and keeps heavy pieces") {
    std::mt19937_64 rng(77);
    const int m = 8, T = 2;
    const double eps = 0.2;
    for (int seed = 0; seed < 100; ++seed) {
        const DyadicMeasure mu = build_from_atoms(oracle::random_atoms(rng, 200, 2), 2, m).normalized();
        const auto dec = decompose_uniform(mu, T, eps);
        CHECK(dec.covers);
        CHECK(dec.pieces_heavy);
        CHECK(dec.covered >= 1 - std::exp2(-eps * m) - 1e-12);
        CHECK(dec.eps_prime == doctest::Approx(eps + std::log2(2.0 * 2 * T + 2) / T));
        std::set<MortonKey> seen;
        for (const auto& p : dec.pieces) {
            CHECK(p.mass_retained >= std::exp2(-dec.eps_prime * m));
            for (MortonKey k : p.keys) CHECK(seen.insert(k).second);
            CHECK(oracle::uniform_violations(restrict_to_keys(mu, p.keys), T, p.exponents) == 0);
        }
    }
}

TEST_CASE("subcube plus point mass splits into two uniform pieces") {
    std::vector<std::pair<Coords, double>> leaves;
    for (int x = 0; x < 16; ++x)
        for (int y = 0; y < 16; ++y) leaves.push_back({{x, y, 0}, 1.0 / 512});
    leaves.push_back({{200, 200, 0}, 0.5});
    const DyadicMeasure mu = DyadicMeasure::from_leaves(2, 8, leaves);
    const auto dec = decompose_uniform(mu, 2, 0.2);
    CHECK(dec.pieces.size() == 2);
    CHECK(dec.covered == doctest::Approx(1.0));
    for (const auto& p : dec.pieces) CHECK(check_uniform(restrict_to_keys(mu, p.keys), 2, p.exponents).empty());
    CHECK(static_cast<double>(dec.pieces.size()) <= std::exp2(dec.eps_prime * 8) * 8);
}

TEST_CASE("branching profiles") {
    const PLFunction f = branching_profile(std::vector<double>{2, 0});
    CHECK(f(0.0) == 0.0);
    CHECK(f(0.5) == doctest::Approx(1.0));
    CHECK(f(1.0) == doctest::Approx(1.0));
    const PLFunction g = branching_profile(std::vector<double>{1, 1, 1, 1});
    for (double x = 0; x <= 1; x += 0.125) CHECK(g(x) == doctest::Approx(x));
    std::mt19937_64 rng(3);
    for (int it = 0; it < 50; ++it) {
        const DyadicMeasure mu = build_from_atoms(oracle::random_atoms(rng, 100, 2), 2, 8).normalized();
        const PLFunction h = branching_profile(extract_uniform(mu, 2));
        CHECK(h.nondecreasing());
        CHECK(h.max_abs_slope() <= 2.0 + 1e-12);
    }
}

TEST_CASE("lift to class") {
    const double eps = 0.01, u = 0.8;
    const PLFunction line = PLFunction::linear(u);
    const PLFunction lifted = lift_to_class(line, u, eps, 2.0);
    for (double x = 0; x <= 1; x += 0.05) CHECK(lifted(x) == doctest::Approx(u * x));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> r(0.0, 1.0);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> beta(4);
        for (auto& b : beta) b = u + (2.0 - u) * r(rng);
        const PLFunction f = branching_profile(beta);
        const PLFunction g = lift_to_class(f, u, eps, 2.0);
        CHECK(check_class(g, 2.0, u - std::sqrt(eps)).ok);
        for (double x = 4 * std::sqrt(eps); x <= 1; x += 0.01) CHECK(g(x) == doctest::Approx(f(x)));
    }
    CHECK_THROWS_AS(lift_to_class(PLFunction::linear(0.1), u, eps, 2.0), HypothesisViolated);
}
