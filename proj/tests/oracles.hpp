#pragma once

// Brute-force and closed-form references. Nothing here calls the routine it
// is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "dyadlab/measure.hpp"
#include "dyadlab/pl_function.hpp"
#include "dyadlab/profile.hpp"

namespace oracle {

using namespace dyadlab;

inline double entropy_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0) h -= x * std::log2(x);
    return h;
}

// Every chain of disjoint intervals [p_i, p_k] with tau <= b - a <= a, summed
// left to right. The slope is the minimal chord over breakpoints in (a, b] and b.
inline double sigma_exhaustive(const Profile& D, const PLFunction& f, double tau,
                               const std::vector<double>& pts) {
    const double d = D.dim();
    const std::size_t n = pts.size();
    auto slope = [&](double a, double b) {
        const double fa = f(a);
        double s = (f(b) - fa) / (b - a);
        for (std::size_t k = 0; k < f.xs().size(); ++k) {
            const double x = f.xs()[k];
            if (x > a && x <= b) s = std::min(s, (f.ys()[k] - fa) / (x - a));
        }
        return s;
    };
    double best = 0.0;
    std::function<void(std::size_t, double)> go = [&](std::size_t i, double acc) {
        best = std::max(best, acc);
        for (std::size_t a = i; a < n; ++a) {
            if (!(pts[a] > 0.0)) continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                const double len = pts[b] - pts[a];
                if (len > pts[a]) break;
                if (len < tau) continue;
                const double s = slope(pts[a], pts[b]);
                if (s < 0.0) continue;
                go(b, acc + len * D(std::min(s, d)));
            }
        }
    };
    go(0, 0.0);
    return best;
}

// Entropy minimum over the vertices of {nu <= theta m, sum nu = 1}: a set of
// cells filled to the cap plus one cell holding the remainder.
inline double robust_entropy_exhaustive(const std::vector<double>& m, double theta) {
    const std::size_t n = m.size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double full = 0.0;
        std::vector<double> nu;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1u) {
                full += theta * m[i];
                nu.push_back(theta * m[i]);
            }
        if (full > 1.0 + 1e-12) continue;
        const double rest = 1.0 - full;
        if (rest <= 1e-15) {
            best = std::min(best, entropy_bits(nu));
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (mask >> j & 1u) continue;
            if (rest > theta * m[j] + 1e-12) continue;
            auto v = nu;
            v.push_back(rest);
            best = std::min(best, entropy_bits(v));
        }
    }
    return best;
}

// Smallest subset with mass > r, over all 2^n subsets (Gray code walk).
inline std::size_t min_count_exhaustive(const std::vector<double>& m, double r) {
    const std::size_t n = m.size();
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::vector<bool> in(n, false);
    double sum = 0.0;
    std::size_t cnt = 0;
    for (unsigned long g = 1; g < (1ul << n); ++g) {
        const int bit = __builtin_ctzl(g);
        in[bit] = !in[bit];
        sum += in[bit] ? m[bit] : -m[bit];
        cnt += in[bit] ? 1 : std::size_t(-1);
        if (cnt < best) {
            double exact = 0.0;  // resum to dodge drift near r
            for (std::size_t i = 0; i < n; ++i)
                if (in[i]) exact += m[i];
            if (exact > r) best = cnt;
        }
    }
    return best == std::numeric_limits<std::size_t>::max() ? 0 : best;
}

// Cubes of side 2^-level meeting the support, straight from leaf coordinates.
inline std::size_t box_count_direct(const DyadicMeasure& mu, int level) {
    std::set<std::vector<std::int64_t>> seen;
    for (const Cell& c : mu.leaves()) {
        const Coords x = morton_decode(c.key, mu.dim(), mu.depth());
        std::vector<std::int64_t> q(mu.dim());
        for (int i = 0; i < mu.dim(); ++i) q[i] = x[i] >> (mu.depth() - level);
        seen.insert(q);
    }
    return seen.size();
}

// Intervals of side 2^-level meeting the ratio-1/4 Cantor set (digits 0, 3 in
// base 4), by recursion on the construction.
inline std::size_t cantor_quarter_count_1d(int level) {
    std::set<std::int64_t> hit;
    std::function<void(int, std::int64_t)> rec = [&](int gen, std::int64_t left) {
        // left endpoint in units of 4^-gen
        if (2 * gen >= level) {
            hit.insert(left >> (2 * gen - level));
            return;
        }
        rec(gen + 1, 4 * left);
        rec(gen + 1, 4 * left + 3);
    };
    rec(0, 0);
    return hit.size();
}

// Dyadic entropy of (x + y)/sqrt2 for Lebesgue on [0,1)^2, from the exact
// triangular CDF on bins of width 2^-n starting at 0.
inline double triangular_entropy(int n) {
    const double s2 = std::sqrt(2.0);
    auto cdf = [&](double v) {
        const double z = v * s2;  // z = x + y in [0, 2]
        if (z <= 0) return 0.0;
        if (z >= 2) return 1.0;
        return z <= 1 ? z * z / 2 : 1 - (2 - z) * (2 - z) / 2;
    };
    std::vector<double> p;
    const double w = std::ldexp(1.0, -n);
    for (double a = 0; a < s2; a += w) p.push_back(cdf(a + w) - cdf(a));
    return entropy_bits(p);
}

// |{nu(Q) <= 2^-p nu(parent) <= 2 nu(Q)}| violations, recomputed from leaves.
inline int uniform_violations(const DyadicMeasure& nu, int T, const std::vector<int>& p) {
    const int d = nu.dim();
    const int m = nu.depth();
    std::vector<std::map<std::vector<std::int64_t>, double>> mass(m / T + 1);
    for (const Cell& c : nu.leaves()) {
        const Coords x = morton_decode(c.key, d, m);
        for (int j = 0; j <= m / T; ++j) {
            std::vector<std::int64_t> q(d);
            for (int i = 0; i < d; ++i) q[i] = x[i] >> (m - j * T);
            mass[j][q] += c.mass;
        }
    }
    int bad = 0;
    for (int j = 1; j <= m / T; ++j) {
        const double f = std::ldexp(1.0, -p[j - 1]);
        for (const auto& [q, mq] : mass[j]) {
            auto par = q;
            for (auto& v : par) v >>= T;
            const double mp = mass[j - 1].at(par) * f;
            if (!(mq <= mp * (1 + 1e-9) && mp <= 2 * mq * (1 + 1e-9))) ++bad;
        }
    }
    return bad;
}

inline std::vector<Atom> random_atoms(std::mt19937_64& rng, int count, int dim) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Atom> out(count);
    for (auto& a : out) {
        for (int i = 0; i < dim; ++i) a.x[i] = u(rng);
        a.weight = 0.1 + u(rng);
    }
    return out;
}

}  // namespace oracle
