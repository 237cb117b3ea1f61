#include "dyadlab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "dyadlab/analysis.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/generators.hpp"

namespace dyadlab {

namespace {

constexpr int kExactDepth = 14;
constexpr int kSampleLeaves = 4096;

struct Sample {
    MortonKey key = 0;
    Point x{};
    double w = 0.0;
};

std::vector<Sample> integration_leaves(const DyadicMeasure& mu) {
    std::vector<Sample> out;
    const auto leaves = mu.leaves();
    const double total = mu.total_mass();
    if (mu.depth() <= kExactDepth) {
        out.reserve(leaves.size());
        for (const Cell& c : leaves) out.push_back({c.key, mu.center(mu.depth(), c.key), c.mass / total});
        return out;
    }
    double acc = 0.0;
    std::size_t i = 0;
    for (int k = 0; k < kSampleLeaves; ++k) {
        const double q = (k + 0.5) / kSampleLeaves * total;
        while (i + 1 < leaves.size() && acc + leaves[i].mass < q) acc += leaves[i++].mass;
        out.push_back({leaves[i].key, mu.center(mu.depth(), leaves[i].key), 1.0 / kSampleLeaves});
    }
    return out;
}

std::vector<double> binned_masses(std::vector<std::pair<std::int64_t, double>>& bins, double total) {
    std::sort(bins.begin(), bins.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> masses;
    for (std::size_t i = 0; i < bins.size();) {
        double m = 0.0;
        std::size_t k = i;
        while (k < bins.size() && bins[k].first == bins[i].first) m += bins[k++].second;
        masses.push_back(m / total);
        i = k;
    }
    return masses;
}

double binned_entropy(std::vector<std::pair<std::int64_t, double>>& bins, double total) {
    return entropy_of_masses(binned_masses(bins, total));
}

double map_value(MapKind kind, const Point& x, const Point& y, int dim) {
    if (kind == MapKind::PinnedDistance) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(s);
    }
    double a = std::atan2(x[1] - y[1], x[0] - y[0]);
    if (a < 0) a += 2.0 * std::numbers::pi;
    return a;
}

void check_pin(const DyadicMeasure& mu, const Point& y) {
    const double gap = 2.0 * std::ldexp(1.0, -mu.depth());
    for (const Cell& c : mu.leaves()) {
        const Point x = mu.center(mu.depth(), c.key);
        double s = 0.0;
        for (int i = 0; i < mu.dim(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        if (std::sqrt(s) < gap) throw HypothesisViolated("pin is not separated from the support");
    }
}

double pushforward_entropy(const DyadicMeasure& mu, MapKind kind, const Point& y, int M) {
    std::vector<std::pair<std::int64_t, double>> bins;
    bins.reserve(mu.leaves().size());
    for (const Cell& c : mu.leaves()) {
        const double v = map_value(kind, mu.center(mu.depth(), c.key), y, mu.dim());
        bins.emplace_back(static_cast<std::int64_t>(std::floor(std::ldexp(v, M))), c.mass);
    }
    return binned_entropy(bins, mu.total_mass());
}

// Projected masses of mu^Q in direction theta at level B - A, Q the level-A
// cube containing the leaf `key`.
std::vector<double> local_masses(const DyadicMeasure& mu, MortonKey key, int A, int B,
                                 const Point& theta) {
    const int d = mu.dim();
    const int m = mu.depth();
    const MortonKey q = key >> (d * (m - A));
    const CubeRef cube = mu.cube(A, q);
    const auto [first, last] = mu.descendants(A, q, m);
    const auto leaves = mu.leaves();
    std::vector<std::pair<std::int64_t, double>> bins;
    bins.reserve(last - first);
    double total = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        const Point c = mu.center(m, leaves[i].key);
        double v = 0.0;
        for (int a = 0; a < d; ++a) {
            const double rel = std::ldexp(c[a], A) - static_cast<double>(cube.coords[a]);
            v += rel * theta[a];
        }
        bins.emplace_back(static_cast<std::int64_t>(std::floor(std::ldexp(v, B - A))), leaves[i].mass);
        total += leaves[i].mass;
    }
    return binned_masses(bins, total);
}

Point direction_at(MapKind kind, const Point& x, const Point& y, int dim, const DirectionField& field) {
    if (field) {
        Point v = field(x);
        double n = 0.0;
        for (int i = 0; i < dim; ++i) n += v[i] * v[i];
        n = std::sqrt(n);
        if (!(n > 0.0)) throw InvalidArgument("direction field returned the zero vector");
        for (int i = 0; i < dim; ++i) v[i] /= n;
        return v;
    }
    return linearization_direction(kind, x, y, dim);
}

void check_inputs(const DyadicMeasure& mu, MapKind kind, const Point& y, const ScaleSchedule& s) {
    if (const std::string err = validate_schedule(s); !err.empty()) throw InvalidArgument(err);
    if (mu.depth() < s.M) throw InvalidArgument("measure depth is below the schedule depth M");
    if (kind == MapKind::Radial2d && mu.dim() != 2) throw InvalidArgument("radial_2d needs d = 2");
    check_pin(mu, y);
}

}  // namespace

std::string validate_schedule(const ScaleSchedule& s) {
    int prev_b = -1;
    for (std::size_t j = 0; j < s.intervals.size(); ++j) {
        const auto [a, b] = s.intervals[j];
        std::ostringstream msg;
        msg << "interval " << j << " (" << a << "," << b << ")";
        if (a < 0 || b > s.M) return msg.str() + " leaves [0,M]";
        if (a >= b) return msg.str() + " is empty";
        if (b > 2 * a) return msg.str() + " has B > 2A";
        if (a < prev_b) return msg.str() + " overlaps its predecessor";
        prev_b = b;
    }
    return {};
}

ScheduleBridge schedule_from_decomposition(const IntervalDecomposition& dec, int m) {
    ScheduleBridge out;
    out.schedule.M = m;
    for (const Interval& iv : dec.entries) {
        const double ra = iv.a * m, rb = iv.b * m;
        const int A = static_cast<int>(std::lround(ra));
        const int B = static_cast<int>(std::lround(rb));
        out.max_drift = std::max({out.max_drift, std::abs(ra - A), std::abs(rb - B)});
        out.schedule.intervals.emplace_back(A, B);
    }
    if (const std::string err = validate_schedule(out.schedule); !err.empty()) {
        throw InvalidArgument("rounded schedule invalid: " + err);
    }
    return out;
}

std::string to_string(MapKind kind) {
    return kind == MapKind::PinnedDistance ? "pinned_distance" : "radial_2d";
}

MapKind map_kind_from_string(const std::string& name) {
    if (name == "pinned_distance") return MapKind::PinnedDistance;
    if (name == "radial_2d") return MapKind::Radial2d;
    throw InvalidArgument("unknown map kind: " + name);
}

Point linearization_direction(MapKind kind, const Point& x, const Point& y, int dim) {
    Point v{};
    double n = 0.0;
    for (int i = 0; i < dim; ++i) {
        v[i] = y[i] - x[i];
        n += v[i] * v[i];
    }
    n = std::sqrt(n);
    if (!(n > 0.0)) throw InvalidArgument("x and y coincide");
    for (int i = 0; i < dim; ++i) v[i] /= n;
    if (kind == MapKind::Radial2d) {
        if (dim != 2) throw InvalidArgument("radial_2d needs d = 2");
        return {-v[1], v[0], 0.0};
    }
    return v;
}

ChainSides chain_sides(const DyadicMeasure& mu, MapKind kind, const Point& y,
                       const ScaleSchedule& schedule, const DirectionField& field) {
    ChainSides out;
    out.J = schedule.J();
    if (mu.is_trivial()) return out;
    check_inputs(mu, kind, y, schedule);
    out.lhs = pushforward_entropy(mu, kind, y, schedule.M);
    for (const Sample& s : integration_leaves(mu)) {
        const Point theta = direction_at(kind, s.x, y, mu.dim(), field);
        double acc = 0.0;
        for (const auto& [A, B] : schedule.intervals) {
            acc += entropy_of_masses(local_masses(mu, s.key, A, B, theta));
        }
        out.rhs += s.w * acc;
    }
    return out;
}

RobustChainSides chain_sides_robust(const DyadicMeasure& mu, const DyadicMeasure& mu_prime,
                                    MapKind kind, const Point& y, const ScaleSchedule& schedule,
                                    double theta, const DirectionField& field) {
    if (!(theta >= 1.0)) throw InvalidArgument("Theta must be at least 1");
    if (mu.dim() != mu_prime.dim() || mu.depth() != mu_prime.depth()) {
        throw InvalidArgument("mu and mu' have different shapes");
    }
    RobustChainSides out;
    out.J = schedule.J();
    if (mu_prime.is_trivial()) return out;
    if (mu.is_trivial()) throw HypothesisViolated("mu' is not dominated by the trivial measure");
    check_inputs(mu, kind, y, schedule);

    const double tmu = mu.total_mass(), tmp = mu_prime.total_mass();
    const auto leaves = mu.leaves();
    double worst = 0.0;
    for (const Cell& c : mu_prime.leaves()) {
        auto it = std::lower_bound(leaves.begin(), leaves.end(), c.key,
                                   [](const Cell& a, MortonKey k) { return a.key < k; });
        const double base = (it != leaves.end() && it->key == c.key) ? it->mass / tmu : 0.0;
        const double ratio = base > 0.0 ? (c.mass / tmp) / base : INFINITY;
        worst = std::max(worst, ratio);
    }
    if (worst > theta * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "mu' <= Theta mu fails; worst leaf ratio " << worst;
        throw HypothesisViolated(msg.str());
    }

    out.lhs = pushforward_entropy(mu_prime, kind, y, schedule.M);
    const double cap = schedule.M * theta;
    for (const Sample& s : integration_leaves(mu_prime)) {
        const Point dir = direction_at(kind, s.x, y, mu.dim(), field);
        double plain = 0.0, robust = 0.0;
        for (const auto& [A, B] : schedule.intervals) {
            std::vector<double> m = local_masses(mu, s.key, A, B, dir);
            plain += entropy_of_masses(m);
            robust += robust_entropy_of_masses(std::move(m), std::max(1.0, cap));
        }
        out.rhs += s.w * robust;
        out.rhs_plain += s.w * plain;
    }
    return out;
}

double fit_chain_constant(const std::vector<ChainInstance>& panel) {
    double c = 0.0;
    for (const ChainInstance& inst : panel) {
        if (inst.sides.J <= 0) continue;
        c = std::max(c, (inst.sides.rhs - inst.sides.lhs) / inst.sides.J);
    }
    return c;
}

std::vector<PanelEntry> random_chain_panel(const PanelOptions& opts) {
    if (opts.count < 1) throw InvalidArgument("panel needs at least one instance");
    if (opts.depth < 4 || opts.depth % 2 != 0) throw InvalidArgument("panel depth must be even and >= 4");
    std::mt19937_64 rng(opts.seed);
    const int m = opts.depth;
    std::vector<PanelEntry> out;
    for (int i = 0; i < opts.count; ++i) {
        const int digits = std::uniform_int_distribution<int>(3, 5)(rng);
        const DyadicMeasure mu = random_digit_cantor(digits, m, rng());

        Point y{};
        std::uniform_real_distribution<double> u(-0.75, 1.75);
        do {
            y = {u(rng), u(rng), 0.0};
        } while (!(y[0] < -0.25 || y[0] > 1.25 || y[1] < -0.25 || y[1] > 1.25));

        IntervalDecomposition dec;
        dec.tau = 1.0 / m;
        int a = std::uniform_int_distribution<int>(1, m / 2)(rng);
        while (a < m) {
            const int b = std::uniform_int_distribution<int>(a + 1, std::min(2 * a, m))(rng);
            dec.entries.push_back({static_cast<double>(a) / m, static_cast<double>(b) / m, 0.0});
            a = b;
            if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) break;
        }
        const ScaleSchedule sched = schedule_from_decomposition(dec, m).schedule;

        PanelEntry e;
        e.instance.id = "panel" + std::to_string(i);
        e.instance.kind = MapKind::PinnedDistance;
        e.instance.m = m;
        e.instance.sides = chain_sides(mu, MapKind::PinnedDistance, y, sched);

        // Heaviest level-2 cubes until half the mass is kept.
        const auto cubes = mu.cells(2);
        std::vector<std::size_t> order(cubes.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t p, std::size_t q) { return cubes[p].mass > cubes[q].mass; });
        std::vector<CubeRef> keep;
        double kept = 0.0;
        for (std::size_t k : order) {
            keep.push_back(mu.cube(2, cubes[k].key));
            kept += cubes[k].mass;
            if (kept >= 0.5 * mu.total_mass()) break;
        }
        const DyadicMeasure mu_prime = restrict_normalize(mu, keep);
        e.theta = mu.total_mass() / kept;
        e.robust = chain_sides_robust(mu, mu_prime, MapKind::PinnedDistance, y, sched, e.theta);
        out.push_back(std::move(e));
    }
    return out;
}

void write_chain_panel(std::ostream& os, const std::vector<ChainInstance>& panel) {
    os << "instance_id,kind,m,J,lhs,rhs,slack,slack_per_J\n";
    const auto old = os.precision(10);
    for (const ChainInstance& inst : panel) {
        const double slack = inst.sides.slack();
        os << inst.id << ',' << to_string(inst.kind) << ',' << inst.m << ',' << inst.sides.J << ','
           << inst.sides.lhs << ',' << inst.sides.rhs << ',' << slack << ','
           << (inst.sides.J > 0 ? slack / inst.sides.J : 0.0) << '\n';
    }
    os.precision(old);
}

}  // namespace dyadlab
