#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "dyadlab/analysis.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/generators.hpp"
#include "dyadlab/measure.hpp"
#include "dyadlab/measure_io.hpp"

using namespace dyadlab;

TEST_CASE("morton keys round trip and nest") {
    std::mt19937_64 rng(7);
    for (int dim = 1; dim <= 3; ++dim) {
        const int level = 40 / dim;
        for (int it = 0; it < 200; ++it) {
            Coords c{};
            for (int i = 0; i < dim; ++i) c[i] = static_cast<std::int64_t>(rng() >> (64 - level));
            const MortonKey k = morton_encode(c, dim, level);
            CHECK(morton_decode(k, dim, level) == c);
            Coords p = c;
            for (int i = 0; i < dim; ++i) p[i] >>= 1;
            CHECK(morton_encode(p, dim, level - 1) == (k >> dim));
        }
    }
}

TEST_CASE("coarse levels are sums of children") {
    std::mt19937_64 rng(3);
    const auto atoms = oracle::random_atoms(rng, 300, 2);
    const DyadicMeasure mu = build_from_atoms(atoms, 2, 7);
    double w = 0;
    for (const auto& a : atoms) w += a.weight;
    CHECK(mu.total_mass() == doctest::Approx(w));
    for (int j = 0; j < 7; ++j) {
        for (const Cell& c : mu.cells(j)) {
            const auto [a, b] = mu.descendants(j, c.key, j + 1);
            double s = 0;
            for (std::size_t i = a; i < b; ++i) s += mu.cells(j + 1)[i].mass;
            CHECK(s == c.mass);
        }
    }
}

TEST_CASE("trivial measure sentinels") {
    const DyadicMeasure z(2, 5);
    CHECK(z.is_trivial());
    CHECK(z.total_mass() == 0.0);
    CHECK(entropy(z, 3) == 0.0);
    CHECK(box_count(z, 3) == 0);
    std::vector<Atom> none(3);
    CHECK(build_from_atoms(none, 2, 4).is_trivial());
}

TEST_CASE("invalid leaves are rejected") {
    CHECK_THROWS_AS(DyadicMeasure::from_cells(2, 3, {{0, -1.0}}), InvalidArgument);
    CHECK_THROWS_AS(DyadicMeasure::from_leaves(1, 2, {{{0, 0, 0}, 1.0}, {{0, 0, 0}, 1.0}}), InvalidArgument);
}

TEST_CASE("box counts agree with direct enumeration") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 20; ++it) {
        const auto atoms = oracle::random_atoms(rng, 50 + it * 10, 1 + it % 3);
        const DyadicMeasure mu = build_from_atoms(atoms, 1 + it % 3, 9);
        for (int j = 0; j <= 9; ++j) CHECK(box_count(mu, j) == oracle::box_count_direct(mu, j));
    }
    const DyadicMeasure c = cantor_product(2, 2, 12);
    for (int j = 0; j <= 12; ++j) {
        const std::size_t one = oracle::cantor_quarter_count_1d(j);
        CHECK(box_count(c, j) == one * one);
    }
}

TEST_CASE("entropy examples") {
    const DyadicMeasure leb = cantor_product(1, 2, 6);
    for (int j = 0; j <= 6; ++j) CHECK(entropy(leb, j) == doctest::Approx(2.0 * j));
    const double p[] = {0.5, 0.25, 0.25};
    CHECK(entropy_of_masses(p) == doctest::Approx(1.5));
}

TEST_CASE("robust entropy examples") {
    CHECK(robust_entropy_of_masses({0.25, 0.25, 0.25, 0.25}, 2.0) == doctest::Approx(1.0));
    CHECK(robust_entropy_of_masses({0.5, 0.3, 0.2}, 1.0) ==
          doctest::Approx(oracle::entropy_bits({0.5, 0.3, 0.2})));
    CHECK_THROWS_AS(robust_entropy_of_masses({0.5, 0.5}, 0.5), InvalidArgument);
}

TEST_CASE("robust entropy matches exhaustive minimum up to 12 cells") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int seed = 0; seed < 200; ++seed) {
        const int n = 1 + static_cast<int>(rng() % 12);
        std::vector<double> m(n);
        double s = 0;
        for (auto& x : m) s += (x = 0.01 + u(rng));
        for (auto& x : m) x /= s;
        const double theta = 1.0 + 4.0 * u(rng);
        const double got = robust_entropy_of_masses(m, theta);
        CHECK(got == doctest::Approx(oracle::robust_entropy_exhaustive(m, theta)).epsilon(1e-9));
        CHECK(got <= oracle::entropy_bits(m) + 1e-12);
    }
}

TEST_CASE("robustness check matches exhaustive minimal sets up to 20 cells") {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int seed = 0; seed < 200; ++seed) {
        const int n = 1 + static_cast<int>(rng() % 20);
        std::vector<double> m(n);
        double s = 0;
        for (auto& x : m) s += (x = std::pow(u(rng), 3) + 1e-3);
        for (auto& x : m) x /= s;
        const double r = 0.05 + 0.9 * u(rng);
        const int level = 1 + static_cast<int>(rng() % 6);
        const double sexp = 0.8 * u(rng);
        const auto res = robustness_check_masses(m, level, sexp, r);
        const std::size_t want = oracle::min_count_exhaustive(m, r);
        CHECK(res.min_count == want);
        CHECK(res.robust == (static_cast<double>(want) > std::exp2(level * sexp)));
        if (!res.robust) {
            double w = 0;
            for (auto i : res.witness) w += m[i];
            CHECK(w > r);
            CHECK(res.witness.size() == want);
        }
    }
}

TEST_CASE("robustness small example") {
    const double m[] = {0.5, 0.5};
    const auto r = robustness_check_masses(m, 3, 0.9, 0.4);
    CHECK_FALSE(r.robust);
    CHECK(r.witness.size() == 1);
}

TEST_CASE("frostman fits of closed-form measures") {
    CHECK(frostman_fit(cantor_product(2, 2, 14), 4, 14).s == doctest::Approx(1.0).epsilon(0.05));
    CHECK(frostman_fit(cantor_product(2, 1, 14), 4, 14).s == doctest::Approx(0.5).epsilon(0.05));
    CHECK(frostman_fit(cantor_product(1, 2, 8), 2, 8).s == doctest::Approx(2.0).epsilon(0.05));
    const auto fit = frostman_fit(cantor_product(2, 2, 14), 4, 14);
    CHECK(fit.C >= 1.0);
    CHECK(fit.level_lo == 4);
    CHECK(fit.level_hi == 14);
}

TEST_CASE("riesz energy of Lebesgue stays bounded below the dimension") {
    double prev = 0;
    for (int m = 3; m <= 7; ++m) {
        const double e = riesz_energy(cantor_product(1, 2, m), 1.0);
        // Direct double sum over leaf centres.
        const DyadicMeasure leb = cantor_product(1, 2, m).normalized();
        double direct = 0;
        const auto lv = leb.leaves();
        for (const Cell& a : lv)
            for (const Cell& b : lv) {
                const Point x = leb.center(m, a.key), y = leb.center(m, b.key);
                double r = std::hypot(x[0] - y[0], x[1] - y[1]);
                if (a.key == b.key) r = std::ldexp(1.0, -m);
                direct += a.mass * b.mass / r;
            }
        CHECK(e == doctest::Approx(direct).epsilon(1e-9));
        CHECK(e < 4.0);
        CHECK(e >= prev - 1e-9);
        prev = e;
    }
}

TEST_CASE("magnify of a first-generation cube is one level shallower") {
    const DyadicMeasure c = cantor_product(2, 2, 10);
    const DyadicMeasure q = magnify(c, {2, {3, 0, 0}});
    const DyadicMeasure want = cantor_product(2, 2, 8);
    REQUIRE(q.leaves().size() == want.leaves().size());
    for (std::size_t i = 0; i < q.leaves().size(); ++i) {
        CHECK(q.leaves()[i].key == want.leaves()[i].key);
        CHECK(q.leaves()[i].mass == doctest::Approx(want.leaves()[i].mass / want.total_mass()));
    }
}

TEST_CASE("text IO round trip is exact") {
    std::mt19937_64 rng(5);
    const DyadicMeasure mu = build_from_atoms(oracle::random_atoms(rng, 100, 3), 3, 8);
    std::stringstream ss;
    write_measure(ss, mu);
    const DyadicMeasure back = read_measure(ss);
    REQUIRE(back.leaves().size() == mu.leaves().size());
    for (std::size_t i = 0; i < mu.leaves().size(); ++i) {
        CHECK(back.leaves()[i].key == mu.leaves()[i].key);
        CHECK(back.leaves()[i].mass == mu.leaves()[i].mass);
    }
    std::stringstream bad("2 3\n1 1\n");
    CHECK_THROWS_AS(read_measure(bad), ParseError);
}
