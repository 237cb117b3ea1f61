#include "dyadlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "dyadlab/errors.hpp"

namespace dyadlab {

namespace {

constexpr double kPi = std::numbers::pi;

struct WPoint {
    Point x{};
    double m = 0.0;
};

std::vector<WPoint> leaf_points(const DyadicMeasure& mu) {
    std::vector<WPoint> out;
    out.reserve(mu.leaves().size());
    for (const Cell& c : mu.leaves()) out.push_back({mu.center(mu.depth(), c.key), c.mass});
    return out;
}

double dist(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

void require_separated(const DyadicMeasure& mu, const Point& y) {
    const double gap = 2.0 * std::ldexp(1.0, -mu.depth());
    if (pin_separation(mu, y) < gap) {
        throw HypothesisViolated("pin is within two grid cells of the support");
    }
}

// Closed arcs [c - w, c + w] on the circle R/(pi Z). Returns the largest total
// mass over a common point, and that point.
std::pair<double, double> stab_max(const std::vector<std::array<double, 3>>& arcs) {
    struct Ev {
        double pos;
        int kind;  // 0 open, 1 close
        double m;
    };
    std::vector<Ev> ev;
    double always = 0.0;
    for (const auto& [c, w, m] : arcs) {
        if (w >= kPi / 2) {
            always += m;
            continue;
        }
        double s = std::fmod(c - w, kPi);
        if (s < 0) s += kPi;
        const double e = s + 2 * w;
        if (e < kPi) {
            ev.push_back({s, 0, m});
            ev.push_back({e, 1, m});
        } else {
            ev.push_back({s, 0, m});
            ev.push_back({kPi, 1, m});
            ev.push_back({0.0, 0, m});
            ev.push_back({e - kPi, 1, m});
        }
    }
    std::stable_sort(ev.begin(), ev.end(), [](const Ev& a, const Ev& b) {
        return a.pos < b.pos || (a.pos == b.pos && a.kind < b.kind);
    });
    double cur = 0.0, best = 0.0, arg = 0.0;
    for (const Ev& e : ev) {
        if (e.kind == 0) {
            cur += e.m;
            if (cur > best) {
                best = cur;
                arg = e.pos;
            }
        } else {
            cur -= e.m;
        }
    }
    return {best + always, arg};
}

Point fibonacci_point(int i, int n) {
    const double ga = kPi * (3.0 - std::sqrt(5.0));
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double ph = ga * i;
    return {r * std::cos(ph), r * std::sin(ph), z};
}

double tube_mass_2d(const std::vector<WPoint>& pts, const Point& x, double r, double psi) {
    const double c = std::cos(psi), s = std::sin(psi);
    double acc = 0.0;
    for (const WPoint& p : pts) {
        const double vx = p.x[0] - x[0], vy = p.x[1] - x[1];
        if (std::abs(-s * vx + c * vy) <= r) acc += p.m;
    }
    return acc;
}

TubeMax tube_max_points(const std::vector<WPoint>& pts, const Point& x, double r, double step,
                        int dim) {
    TubeMax out;
    if (dim == 2 && step <= 0.0) {
        std::vector<std::array<double, 3>> arcs;
        arcs.reserve(pts.size());
        for (const WPoint& p : pts) {
            const double vx = p.x[0] - x[0], vy = p.x[1] - x[1];
            const double rho = std::hypot(vx, vy);
            const double w = rho <= r ? kPi : std::asin(std::min(1.0, r / rho));
            arcs.push_back({std::atan2(vy, vx), w, p.m});
        }
        const auto [m, psi] = stab_max(arcs);
        out.mass = m;
        out.direction = {std::cos(psi), std::sin(psi), 0.0};
        return out;
    }
    if (dim == 2) {
        const int n = static_cast<int>(std::ceil(kPi / step));
        for (int k = 0; k < n; ++k) {
            const double psi = k * kPi / n;
            const double m = tube_mass_2d(pts, x, r, psi);
            if (m > out.mass) {
                out.mass = m;
                out.direction = {std::cos(psi), std::sin(psi), 0.0};
            }
        }
        return out;
    }
    if (dim != 3) throw InvalidArgument("tube queries need d = 2 or 3");
    if (step <= 0.0) step = r / 4.0;
    const int n = std::min(200000, static_cast<int>(std::ceil(4.0 * kPi / (step * step))));
    for (int i = 0; i < n; ++i) {
        const Point w = fibonacci_point(i, n);
        if (w[2] < 0.0) continue;  // lines are unoriented
        double acc = 0.0;
        for (const WPoint& p : pts) {
            const double v0 = p.x[0] - x[0], v1 = p.x[1] - x[1], v2 = p.x[2] - x[2];
            const double t = v0 * w[0] + v1 * w[1] + v2 * w[2];
            const double e0 = v0 - t * w[0], e1 = v1 - t * w[1], e2 = v2 - t * w[2];
            if (e0 * e0 + e1 * e1 + e2 * e2 <= r * r) acc += p.m;
        }
        if (acc > out.mass) {
            out.mass = acc;
            out.direction = w;
        }
    }
    return out;
}

}  // namespace

DirectionMeasure::DirectionMeasure(int dim, int cells) : dim_(dim) {
    if (dim != 2 && dim != 3) throw InvalidArgument("direction measures need d = 2 or 3");
    if (cells < 1) throw InvalidArgument("direction grid needs at least one cell");
    masses_.assign(cells, 0.0);
    dirs_.resize(cells);
    for (int i = 0; i < cells; ++i) {
        if (dim == 2) {
            const double a = (i + 0.5) * 2.0 * kPi / cells;
            dirs_[i] = {std::cos(a), std::sin(a), 0.0};
        } else {
            dirs_[i] = fibonacci_point(i, cells);
        }
    }
    if (dim == 3) build_index();
}

void DirectionMeasure::build_index() {
    const double h = 2.0 * resolution();
    buckets_ = std::max(1, static_cast<int>(std::ceil(2.0 / h)));
    for (int i = 0; i < size(); ++i) {
        long key = 0;
        for (int a = 0; a < 3; ++a) {
            const int b = std::clamp(static_cast<int>((dirs_[i][a] + 1.0) / 2.0 * buckets_), 0, buckets_ - 1);
            key = key * buckets_ + b;
        }
        index_[key].push_back(i);
    }
}

double DirectionMeasure::resolution() const {
    if (dim_ == 2) return 2.0 * kPi / size();
    return std::sqrt(4.0 * kPi / size());
}

Point DirectionMeasure::direction(int cell) const { return dirs_.at(cell); }

double DirectionMeasure::angle(int cell) const { return (cell + 0.5) * 2.0 * kPi / size(); }

int DirectionMeasure::locate(const Point& v) const {
    double norm = 0.0;
    for (int i = 0; i < dim_; ++i) norm += v[i] * v[i];
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw InvalidArgument("cannot locate the zero vector");
    if (dim_ == 2) {
        double a = std::atan2(v[1], v[0]);
        if (a < 0) a += 2.0 * kPi;
        int k = static_cast<int>(a / (2.0 * kPi) * size());
        return std::clamp(k, 0, size() - 1);
    }
    const Point u{v[0] / norm, v[1] / norm, v[2] / norm};
    int b[3];
    for (int a = 0; a < 3; ++a) {
        b[a] = std::clamp(static_cast<int>((u[a] + 1.0) / 2.0 * buckets_), 0, buckets_ - 1);
    }
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dz = -1; dz <= 1; ++dz) {
                const int x = b[0] + dx, y = b[1] + dy, z = b[2] + dz;
                if (x < 0 || y < 0 || z < 0 || x >= buckets_ || y >= buckets_ || z >= buckets_) continue;
                const auto it = index_.find((static_cast<long>(x) * buckets_ + y) * buckets_ + z);
                if (it == index_.end()) continue;
                for (int i : it->second) {
                    const double dd = dist(u, dirs_[i], 3);
                    if (dd < bd || (dd == bd && i < best)) {
                        bd = dd;
                        best = i;
                    }
                }
            }
        }
    }
    if (best < 0) {
        for (int i = 0; i < size(); ++i) {
            const double dd = dist(u, dirs_[i], 3);
            if (dd < bd) {
                bd = dd;
                best = i;
            }
        }
    }
    return best;
}

double DirectionMeasure::total_mass() const {
    double s = 0.0;
    for (double m : masses_) s += m;
    return s;
}

DirectionMeasure DirectionMeasure::normalized() const {
    const double t = total_mass();
    if (!(t > 0.0)) return *this;
    DirectionMeasure out = *this;
    for (double& m : out.masses_) m /= t;
    return out;
}

DirectionMeasure uniform_arc(int cells, double lo, double hi) {
    if (!(lo < hi)) throw InvalidArgument("arc needs lo < hi");
    DirectionMeasure rho(2, cells);
    int count = 0;
    for (int i = 0; i < cells; ++i) {
        double a = rho.angle(i);
        for (double shift : {0.0, 2.0 * kPi, -2.0 * kPi}) {
            if (a + shift >= lo && a + shift < hi) {
                rho.set(i, 1.0);
                ++count;
                break;
            }
        }
    }
    if (count == 0) throw InvalidArgument("arc contains no cell centers");
    return rho.normalized();
}

double LineMeasure::entropy_at(int n) const {
    const auto m = masses_at(n);
    return entropy_of_masses(m);
}

std::size_t LineMeasure::box_count_at(int n) const {
    if (measure.is_trivial()) return 0;
    const int lvl = std::clamp(n + K, 0, measure.depth());
    return measure.cells(lvl).size();
}

std::vector<double> LineMeasure::masses_at(int n) const {
    if (measure.is_trivial()) return {};
    const int lvl = std::clamp(n + K, 0, measure.depth());
    std::vector<double> out = level_masses(measure, lvl);
    const double t = measure.total_mass();
    for (double& x : out) x /= t;
    return out;
}

LineMeasure line_measure_from_values(const std::vector<std::pair<double, double>>& values,
                                     int out_depth, bool force_lo_zero) {
    LineMeasure lm;
    lm.out_depth = out_depth;
    if (values.empty()) {
        lm.measure = DyadicMeasure(1, 0);
        return lm;
    }
    double vmin = values.front().first, vmax = vmin;
    for (const auto& [v, m] : values) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (force_lo_zero) {
        if (vmin < 0.0) throw InvalidArgument("negative value in a range pinned at 0");
        vmin = 0.0;
    }
    // K >= 1 keeps level n + K >= 1, hence absolutely aligned, for every n >= 0.
    int K = 1;
    if (vmax > vmin) K = std::max(K, static_cast<int>(std::ceil(std::log2(vmax - vmin))));
    double lo = 0.0;
    for (;;) {
        const double w = std::ldexp(1.0, K);
        // Half alignment: a range straddling a multiple of 2^K still fits.
        lo = force_lo_zero ? 0.0 : std::floor(vmin / (w / 2)) * (w / 2);
        if (lo + w > vmax) break;
        ++K;
    }
    const int rel = out_depth + K;
    if (rel < 0 || rel > kMaxDepth) throw InvalidArgument("line resolution outside 0..40 levels");
    const std::int64_t side = std::int64_t{1} << rel;
    std::vector<Cell> cells;
    cells.reserve(values.size());
    for (const auto& [v, m] : values) {
        if (m <= 0.0) continue;
        auto c = static_cast<std::int64_t>(std::floor(std::ldexp(v - lo, out_depth)));
        c = std::clamp<std::int64_t>(c, 0, side - 1);
        cells.push_back({static_cast<MortonKey>(c), m});
    }
    lm.measure = DyadicMeasure::from_cells(1, rel, std::move(cells));
    lm.lo = lo;
    lm.K = K;
    return lm;
}

LineMeasure project_linear(const DyadicMeasure& mu, const Point& theta, int out_depth) {
    double n2 = 0.0;
    for (int i = 0; i < mu.dim(); ++i) n2 += theta[i] * theta[i];
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-12) throw InvalidArgument("direction is not a unit vector");
    std::vector<std::pair<double, double>> vals;
    vals.reserve(mu.leaves().size());
    for (const Cell& c : mu.leaves()) {
        const Point p = mu.center(mu.depth(), c.key);
        double v = 0.0;
        for (int i = 0; i < mu.dim(); ++i) v += p[i] * theta[i];
        vals.emplace_back(v, c.mass);
    }
    return line_measure_from_values(vals, out_depth);
}

double pin_separation(const DyadicMeasure& mu, const Point& y) {
    double best = std::numeric_limits<double>::infinity();
    for (const Cell& c : mu.leaves()) best = std::min(best, dist(mu.center(mu.depth(), c.key), y, mu.dim()));
    return best;
}

DirectionMeasure project_radial(const DyadicMeasure& mu, const Point& y, int cells) {
    if (mu.dim() != 2 && mu.dim() != 3) throw InvalidArgument("radial projection needs d = 2 or 3");
    require_separated(mu, y);
    DirectionMeasure rho(mu.dim(), cells);
    for (const Cell& c : mu.leaves()) {
        const Point p = mu.center(mu.depth(), c.key);
        Point v{};
        for (int i = 0; i < mu.dim(); ++i) v[i] = p[i] - y[i];
        rho.add(rho.locate(v), c.mass);
    }
    return rho;
}

LineMeasure pinned_distance(const DyadicMeasure& mu, const Point& y, int out_depth) {
    require_separated(mu, y);
    std::vector<std::pair<double, double>> vals;
    vals.reserve(mu.leaves().size());
    for (const Cell& c : mu.leaves()) {
        vals.emplace_back(dist(mu.center(mu.depth(), c.key), y, mu.dim()), c.mass);
    }
    return line_measure_from_values(vals, out_depth, true);
}

TubeMax tube_mass_max(const DyadicMeasure& nu, const Point& x, double r, double step) {
    if (r < std::ldexp(1.0, -nu.depth())) throw InvalidArgument("tube radius below the grid scale");
    return tube_max_points(leaf_points(nu), x, r, step, nu.dim());
}

std::vector<Point> pin_panel(const DyadicMeasure& mu, int count) {
    std::vector<Point> pins;
    if (mu.is_trivial() || count <= 0) return pins;
    const auto leaves = mu.leaves();
    const double total = mu.total_mass();
    double acc = 0.0;
    std::size_t i = 0;
    long last = -1;
    for (int k = 0; k < count; ++k) {
        const double q = (k + 0.5) / count * total;
        while (i + 1 < leaves.size() && acc + leaves[i].mass < q) acc += leaves[i++].mass;
        if (static_cast<long>(i) == last) continue;
        last = static_cast<long>(i);
        pins.push_back(mu.center(mu.depth(), leaves[i].key));
    }
    return pins;
}

std::vector<ThinTubeProfile> thin_tubes_profile(const DyadicMeasure& mu, const DyadicMeasure& nu,
                                                const std::vector<int>& r_levels,
                                                const ThinTubeOptions& opts) {
    if (mu.dim() != nu.dim()) throw InvalidArgument("mu and nu live in different dimensions");
    if (r_levels.size() < 2) throw InvalidArgument("thin tubes need at least two radii");
    if (mu.is_trivial() || nu.is_trivial()) throw InvalidArgument("thin tubes on a trivial measure");
    const int kmin = *std::min_element(r_levels.begin(), r_levels.end());
    const double rmax = std::ldexp(1.0, -kmin);
    const auto pins = pin_panel(mu, opts.pins);
    for (const Point& p : pins) {
        if (pin_separation(nu, p) < 4.0 * rmax) {
            throw HypothesisViolated("supports are closer than 4 times the largest tube radius");
        }
    }
    const std::vector<WPoint> base = leaf_points(nu);
    const double total = nu.total_mass();
    const int kfin = *std::max_element(r_levels.begin(), r_levels.end());
    const double rfin = std::ldexp(1.0, -kfin);

    std::vector<ThinTubeProfile> out;
    for (const Point& x : pins) {
        std::vector<WPoint> pts = base;
        for (int k = 0; k < opts.remove_top; ++k) {
            const TubeMax tm = tube_max_points(pts, x, rfin, 0.0, nu.dim());
            std::erase_if(pts, [&](const WPoint& p) {
                double v[3] = {p.x[0] - x[0], p.x[1] - x[1], p.x[2] - x[2]};
                double t = 0.0;
                for (int i = 0; i < nu.dim(); ++i) t += v[i] * tm.direction[i];
                double e = 0.0;
                for (int i = 0; i < nu.dim(); ++i) e += (v[i] - t * tm.direction[i]) * (v[i] - t * tm.direction[i]);
                return e <= rfin * rfin;
            });
        }
        ThinTubeProfile prof;
        prof.pin = x;
        double kept = 0.0;
        for (const WPoint& p : pts) kept += p.m;
        prof.c = kept / total;
        std::vector<double> lx, ly;
        for (int k : r_levels) {
            const double r = std::ldexp(1.0, -k);
            const double m = tube_max_points(pts, x, r, 0.0, nu.dim()).mass / total;
            prof.r.push_back(r);
            prof.worst.push_back(m);
            lx.push_back(-k);
            ly.push_back(std::log2(std::max(m, 1e-300)));
        }
        const double n = static_cast<double>(lx.size());
        const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
        const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        prof.t = std::max(0.0, sxy / sxx);
        prof.K = 0.0;
        for (std::size_t i = 0; i < prof.r.size(); ++i) {
            prof.K = std::max(prof.K, prof.worst[i] / std::pow(prof.r[i], prof.t));
        }
        out.push_back(std::move(prof));
    }
    return out;
}

double hyperplane_concentration(const DirectionMeasure& rho, double a) {
    if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("hyperplane neighbourhood needs 0 < a < 1");
    const double total = rho.total_mass();
    if (!(total > 0.0)) return 0.0;
    if (rho.dim() == 2) {
        std::vector<std::array<double, 3>> arcs;
        const double w = std::asin(a);
        for (int i = 0; i < rho.size(); ++i) {
            if (rho.mass(i) > 0.0) arcs.push_back({rho.angle(i), w, rho.mass(i)});
        }
        return stab_max(arcs).first / total;
    }
    const double step = a / 4.0;
    const int n = std::min(400000, static_cast<int>(std::ceil(4.0 * kPi / (step * step))));
    std::vector<int> live;
    for (int i = 0; i < rho.size(); ++i) {
        if (rho.mass(i) > 0.0) live.push_back(i);
    }
    double best = 0.0;
    for (int k = 0; k < n; ++k) {
        const Point nrm = fibonacci_point(k, n);
        if (nrm[2] < 0.0) continue;
        double acc = 0.0;
        for (int i : live) {
            const Point v = rho.direction(i);
            if (std::abs(v[0] * nrm[0] + v[1] * nrm[1] + v[2] * nrm[2]) <= a) acc += rho.mass(i);
        }
        best = std::max(best, acc);
    }
    return best / total;
}

AuditResult adapted_audit(const DirectionMeasure& rho, const DyadicMeasure& mu, int delta_level,
                          double s, double eps) {
    if (rho.dim() != mu.dim()) throw InvalidArgument("rho and mu live in different dimensions");
    if (delta_level > mu.depth()) throw InvalidArgument("audit level deeper than the measure");
    AuditResult res;
    if (mu.is_trivial()) return res;
    const int lo = std::max(1, delta_level / 4);
    if (delta_level - lo >= 2) res.frostman_s = frostman_fit(mu, lo, delta_level).s;
    const double r = std::exp2(-eps * delta_level);
    const double total = rho.total_mass();
    double bad = 0.0;
    for (int i = 0; i < rho.size(); ++i) {
        if (!(rho.mass(i) > 0.0)) continue;
        ++res.cells_audited;
        const LineMeasure p = project_linear(mu, rho.direction(i), delta_level);
        const auto m = p.masses_at(delta_level);
        if (!robustness_check_masses(m, delta_level, s - eps, r).robust) {
            bad += rho.mass(i);
            ++res.cells_failing;
            res.failing.push_back(i);
        }
    }
    res.failing_fraction = total > 0.0 ? bad / total : 0.0;
    return res;
}

ProjectionBound entropy_projection_bound(const DirectionMeasure& rho, const DyadicMeasure& mu, int m,
                                         double a, double b, double fitted_constant,
                                         bool allow_unverified) {
    ProjectionBound out;
    out.concentration = hyperplane_concentration(rho, a);
    out.precondition = out.concentration <= b;
    if (!out.precondition && !allow_unverified) {
        throw HypothesisViolated("hyperplane concentration exceeds b; precondition unverified");
    }
    if (mu.is_trivial()) {
        out.bound_holds = true;
        return out;
    }
    const DyadicMeasure nmu = mu.normalized();
    out.threshold = entropy(nmu, m) / mu.dim() - std::log2(1.0 / a) - fitted_constant;
    const double total = rho.total_mass();
    double bad = 0.0;
    for (int i = 0; i < rho.size(); ++i) {
        if (!(rho.mass(i) > 0.0)) continue;
        const LineMeasure p = project_linear(nmu, rho.direction(i), m);
        if (p.entropy_at(m) < out.threshold) bad += rho.mass(i);
    }
    out.bad_mass = total > 0.0 ? bad / total : 0.0;
    out.bound_holds = out.bad_mass <= b;
    return out;
}

}  // namespace dyadlab
