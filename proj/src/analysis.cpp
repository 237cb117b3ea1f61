#include "dyadlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "dyadlab/errors.hpp"

namespace dyadlab {

namespace {

void require_normalized(const DyadicMeasure& mu, const char* what) {
    if (!mu.is_trivial() && !mu.is_normalized()) {
        throw InvalidArgument(std::string(what) + " requires a normalized measure");
    }
}

}  // namespace

std::vector<double> level_masses(const DyadicMeasure& mu, int level) {
    std::vector<double> out;
    const auto row = mu.cells(level);
    out.reserve(row.size());
    for (const Cell& c : row) out.push_back(c.mass);
    return out;
}

double entropy_of_masses(std::span<const double> masses) {
    double h = 0.0;
    for (double p : masses) {
        if (p < kEntropyFloor) continue;
        h -= p * std::log2(p);
    }
    return std::max(h, 0.0);
}

double entropy(const DyadicMeasure& mu, int level) {
    require_normalized(mu, "entropy");
    if (mu.is_trivial()) return 0.0;
    const auto m = level_masses(mu, level);
    return entropy_of_masses(m);
}

double robust_entropy_of_masses(std::vector<double> masses, double theta) {
    if (!(theta >= 1.0)) throw InvalidArgument("robust entropy needs Theta >= 1");
    std::sort(masses.begin(), masses.end(), std::greater<>());
    double total = 0.0;
    for (double m : masses) total += m;
    if (theta * total < 1.0 - 1e-12) {
        throw HypothesisViolated("Theta times total mass is below 1");
    }
    std::vector<double> nu;
    double remaining = 1.0;
    for (double m : masses) {
        if (remaining <= 0.0) break;
        const double take = std::min(theta * m, remaining);
        nu.push_back(take);
        remaining -= take;
    }
    return entropy_of_masses(nu);
}

double robust_entropy(const DyadicMeasure& mu, int level, double theta) {
    if (!(theta >= 1.0)) throw InvalidArgument("robust entropy needs Theta >= 1");
    require_normalized(mu, "robust_entropy");
    if (mu.is_trivial()) return 0.0;
    return robust_entropy_of_masses(level_masses(mu, level), theta);
}

std::size_t box_count(const DyadicMeasure& mu, int level) {
    return mu.cells(level).size();
}

std::size_t box_count(std::span<const CubeRef> cubes, int dim, int level) {
    std::vector<MortonKey> keys;
    keys.reserve(cubes.size());
    for (const CubeRef& q : cubes) {
        if (q.level < level) throw InvalidArgument("cube coarser than the counting level");
        keys.push_back(morton_encode(q.coords, dim, q.level) >> (dim * (q.level - level)));
    }
    std::sort(keys.begin(), keys.end());
    return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

FrostmanFit frostman_fit(const DyadicMeasure& mu, int level_lo, int level_hi,
                         double budget_bits) {
    if (mu.is_trivial()) throw InvalidArgument("frostman_fit on the trivial measure");
    if (level_lo < 0 || level_hi > mu.depth() || level_hi - level_lo < 2) {
        throw InvalidArgument("frostman_fit needs at least 3 levels inside 0..depth");
    }
    const double total = mu.total_mass();
    std::vector<double> js, ls;
    for (int j = level_lo; j <= level_hi; ++j) {
        double mx = 0.0;
        for (const Cell& c : mu.cells(j)) mx = std::max(mx, c.mass);
        js.push_back(j);
        ls.push_back(-std::log2(mx / total));
    }
    const std::size_t n = js.size();
    const double jm = std::accumulate(js.begin(), js.end(), 0.0) / n;
    const double lm = std::accumulate(ls.begin(), ls.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (js[i] - jm) * (ls[i] - lm);
        sxx += (js[i] - jm) * (js[i] - jm);
    }
    double s = std::max(0.0, sxy / sxx);
    // Largest exponent whose constant stays inside the budget.
    for (std::size_t i = 0; i < n; ++i) {
        if (js[i] > 0) s = std::min(s, (ls[i] + budget_bits) / js[i]);
    }
    s = std::max(s, 0.0);

    double worst = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = js[i] * s - ls[i];
        worst = std::max(worst, v);
        best = std::min(best, v);
    }
    FrostmanFit fit;
    fit.s = s;
    const double logc = std::max(0.0, worst);
    fit.C = std::exp2(logc);
    fit.level_lo = level_lo;
    fit.level_hi = level_hi;
    fit.delta_lo = std::ldexp(1.0, -level_hi);
    fit.delta_hi = std::ldexp(1.0, -level_lo);
    fit.residual = std::max(0.0, logc - best);
    return fit;
}

RobustnessResult robustness_check_masses(std::span<const double> masses, int level, double s,
                                         double r) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("robustness needs 0 < r < 1");
    std::vector<std::size_t> order(masses.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return masses[a] > masses[b]; });
    RobustnessResult res;
    double acc = 0.0;
    std::size_t k = 0;
    for (; k < order.size(); ++k) {
        acc += masses[order[k]];
        if (acc > r) break;
    }
    if (k == order.size()) {
        // No set carries mass above r.
        return res;
    }
    res.min_count = k + 1;
    const double threshold = std::exp2(level * s);
    res.robust = static_cast<double>(res.min_count) > threshold;
    if (!res.robust) res.witness.assign(order.begin(), order.begin() + res.min_count);
    return res;
}

RobustnessResult robustness_check(const DyadicMeasure& mu, int level, double s, double r) {
    if (mu.is_trivial()) return {};
    const auto m = level_masses(mu, level);
    return robustness_check_masses(m, level, s, r);
}

double riesz_energy(const DyadicMeasure& mu, double s) {
    if (!(s > 0.0)) throw InvalidArgument("Riesz energy needs s > 0");
    if (mu.is_trivial()) return 0.0;
    const auto leaves = mu.leaves();
    const int m = mu.depth();
    std::vector<Point> centers;
    centers.reserve(leaves.size());
    for (const Cell& c : leaves) centers.push_back(mu.center(m, c.key));
    const double diag = std::exp2(m * s);
    double e = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        e += leaves[i].mass * leaves[i].mass * diag;
        double row = 0.0;
        for (std::size_t k = i + 1; k < leaves.size(); ++k) {
            double d2 = 0.0;
            for (int a = 0; a < mu.dim(); ++a) {
                const double t = centers[i][a] - centers[k][a];
                d2 += t * t;
            }
            row += leaves[k].mass * std::pow(d2, -0.5 * s);
        }
        e += 2.0 * leaves[i].mass * row;
    }
    return e;
}

double l2_density_norm(const DyadicMeasure& mu, int level) {
    if (mu.is_trivial()) return 0.0;
    double acc = 0.0;
    for (const Cell& c : mu.cells(level)) acc += c.mass * c.mass;
    return std::ldexp(acc, level * mu.dim());
}

}  // namespace dyadlab
