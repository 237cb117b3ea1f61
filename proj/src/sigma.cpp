#include "dyadlab/sigma.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "dyadlab/errors.hpp"

namespace dyadlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRel = 1e-12;
}  // namespace

double phi(double u) {
    if (!(u > 0.0 && u <= 1.0)) throw InvalidArgument("phi needs u in (0,1]");
    return u / 2.0 + u * u / (2.0 * (2.0 + std::sqrt(u * u + 4.0)));
}

double phi_residual(double u, double x) { return x * x + (2.0 - u) * x - u; }

double c_d(int d) {
    if (d < 4) throw InvalidArgument("c_d is defined for d >= 4");
    if (d % 2 == 1) return phi(0.5) / (d + 1);
    return (phi(1.0) - 0.5) / (d + 1);
}

bool allowable(double a, double b, double tau) {
    const double len = b - a;
    return len >= tau * (1.0 - kRel) && len <= a * (1.0 + kRel);
}

double best_slope(const PLFunction& f, double a, double b) {
    if (!(a < b)) throw InvalidArgument("best_slope needs a < b");
    const double fa = f(a);
    double m = (f(b) - fa) / (b - a);
    const auto& xs = f.xs();
    const auto& ys = f.ys();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] > a && xs[i] <= b) m = std::min(m, (ys[i] - fa) / (xs[i] - a));
    }
    return m;
}

bool is_superlinear(const PLFunction& f, double a, double b, double sigma, double tol) {
    if (!(a < b)) throw InvalidArgument("is_superlinear needs a < b");
    const double fa = f(a);
    auto ok = [&](double x) { return f(x) >= fa + sigma * (x - a) - tol; };
    if (!ok(b)) return false;
    for (double x : f.xs()) {
        if (x > a && x < b && !ok(x)) return false;
    }
    return true;
}

std::string check_decomposition(const IntervalDecomposition& dec, double d, const PLFunction* f) {
    std::ostringstream msg;
    for (std::size_t j = 0; j < dec.entries.size(); ++j) {
        const Interval& I = dec.entries[j];
        if (!(I.a < I.b)) {
            msg << "entry " << j << " is empty";
            return msg.str();
        }
        if (j > 0 && I.a < dec.entries[j - 1].b - 1e-12) {
            msg << "entry " << j << " overlaps its predecessor";
            return msg.str();
        }
        if (!allowable(I.a, I.b, dec.tau)) {
            msg << "entry " << j << " is not allowable";
            return msg.str();
        }
        if (I.sigma < -1e-12 || I.sigma > d + 1e-12) {
            msg << "entry " << j << " has sigma outside [0,d]";
            return msg.str();
        }
        if (f && !is_superlinear(*f, I.a, I.b, I.sigma, 1e-9)) {
            msg << "entry " << j << " is not sigma-superlinear";
            return msg.str();
        }
    }
    return {};
}

Interval merge(const PLFunction& f, const Interval& left, const Interval& right) {
    if (std::abs(left.b - right.a) > 1e-12) throw InvalidArgument("merge needs adjacent intervals");
    if (left.sigma < right.sigma) {
        throw HypothesisViolated("merge needs sigma1 >= sigma2");
    }
    Interval out;
    out.a = left.a;
    out.b = right.b;
    out.sigma = (left.sigma * (left.b - left.a) + right.sigma * (right.b - right.a)) /
                (right.b - left.a);
    if (!is_superlinear(f, out.a, out.b, out.sigma, 1e-9)) {
        throw HypothesisViolated("merged interval lost superlinearity");
    }
    return out;
}

std::vector<Interval> merge_increasing(const PLFunction& f, const std::vector<Interval>& chain) {
    for (std::size_t j = 1; j < chain.size(); ++j) {
        if (std::abs(chain[j].a - chain[j - 1].b) > 1e-12) {
            throw InvalidArgument("merge_increasing needs a consecutive chain");
        }
    }
    std::vector<Interval> st;
    for (const Interval& I : chain) {
        st.push_back(I);
        while (st.size() >= 2 && st[st.size() - 2].sigma >= st.back().sigma) {
            const Interval r = st.back();
            st.pop_back();
            st.back() = merge(f, st.back(), r);
        }
    }
    return st;
}

SuperlinearResult superlinear_decomposition(const PLFunction& f, double a, double b, double eps,
                                            double rho, double d) {
    if (!(rho > 0.0) || a < rho * (1 - kRel) || b - a < rho * (1 - kRel) || b > 1.0 + kRel) {
        throw InvalidArgument("superlinear_decomposition: range too small for rho");
    }
    if (!(eps > 0.0)) throw InvalidArgument("superlinear_decomposition: eps must be positive");
    if (!f.nondecreasing()) throw InvalidArgument("superlinear_decomposition: f must be nondecreasing");
    if (f.max_abs_slope() > d + 1e-12) throw InvalidArgument("f is not d-Lipschitz");

    SuperlinearResult res;
    res.tau = std::min(rho / 2.0, eps * rho / (2.0 * (d + 1.0)));
    const double h = res.tau / 2.0;

    std::vector<double> pts;
    const long steps = static_cast<long>(std::floor((b - a) / h + 1e-9));
    for (long k = 0; k <= steps; ++k) pts.push_back(a + static_cast<double>(k) * h);
    for (double x : f.xs()) {
        if (x > a && x < b) pts.push_back(x);
    }
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-13; }),
              pts.end());
    pts.back() = b;

    const std::size_t n = pts.size();
    std::vector<double> best(n, -kInf), sig(n, 0.0);
    std::vector<long> from(n, -1);
    best[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (best[i] == -kInf) continue;
        for (std::size_t k = i + 1; k < n; ++k) {
            const double len = pts[k] - pts[i];
            if (len > rho * (1 + kRel)) break;
            if (len < res.tau * (1 - kRel)) continue;
            const double sl = std::clamp(best_slope(f, pts[i], pts[k]), 0.0, d);
            const double cand = best[i] + len * sl;
            if (cand > best[k]) {
                best[k] = cand;
                from[k] = static_cast<long>(i);
                sig[k] = sl;
            }
        }
    }
    if (best[n - 1] == -kInf) throw HypothesisViolated("no admissible chain covers the range");
    std::vector<Interval> rev;
    for (long k = static_cast<long>(n) - 1; k > 0; k = from[k]) {
        rev.push_back({pts[from[k]], pts[k], sig[k]});
    }
    res.dec.entries.assign(rev.rbegin(), rev.rend());
    res.dec.tau = res.tau;
    res.total = 0.0;
    for (const Interval& I : res.dec.entries) res.total += (I.b - I.a) * I.sigma;
    res.target = f(b) - f(a) - eps * (b - a);
    res.meets_target = res.total >= res.target - 1e-12;
    return res;
}

int default_grid(double tau, int segments) {
    const double raw = std::ceil(8.0 / tau - 1e-9);
    const long m = static_cast<long>(std::ceil(raw / segments - 1e-12));
    return static_cast<int>(std::max<long>(m, 1) * segments);
}

SigmaValue sigma_on_points(const Profile& D, const PLFunction& f, double tau,
                           const std::vector<double>& pts) {
    const double d = D.dim();
    const std::size_t n = pts.size();
    std::vector<double> fv(n);
    for (std::size_t k = 0; k < n; ++k) fv[k] = f(pts[k]);
    const auto& bx = f.xs();
    const auto& by = f.ys();

    std::vector<double> best(n, 0.0), pushed(n, -kInf), pushed_sigma(n, 0.0), sig(n, 0.0);
    std::vector<long> pushed_from(n, -1), from(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        best[i] = i ? best[i - 1] : 0.0;
        from[i] = -1;
        if (pushed[i] > best[i]) {
            best[i] = pushed[i];
            from[i] = pushed_from[i];
            sig[i] = pushed_sigma[i];
        }
        const double a = pts[i];
        if (!(a > 0.0)) continue;
        const double fa = fv[i];
        double running = kInf;
        std::size_t p = static_cast<std::size_t>(std::upper_bound(bx.begin(), bx.end(), a) - bx.begin());
        for (std::size_t k = i + 1; k < n; ++k) {
            const double b = pts[k];
            if (b - a > a * (1.0 + kRel)) break;
            while (p < bx.size() && bx[p] <= b) {
                running = std::min(running, (by[p] - fa) / (bx[p] - a));
                ++p;
            }
            if (!allowable(a, b, tau)) continue;
            double sl = std::min(running, (fv[k] - fa) / (b - a));
            if (sl < 0.0) continue;
            sl = std::min(sl, d);
            const double cand = best[i] + (b - a) * D(sl);
            if (cand > pushed[k]) {
                pushed[k] = cand;
                pushed_from[k] = static_cast<long>(i);
                pushed_sigma[k] = sl;
            }
        }
    }
    SigmaValue out;
    out.value = n ? best[n - 1] : 0.0;
    std::vector<Interval> rev;
    long k = static_cast<long>(n) - 1;
    while (k > 0) {
        if (from[k] < 0) {
            --k;
            continue;
        }
        rev.push_back({pts[from[k]], pts[k], sig[k]});
        k = from[k];
    }
    out.dec.entries.assign(rev.rbegin(), rev.rend());
    out.dec.tau = tau;
    out.dec.value = out.value;
    return out;
}

SigmaValue sigma_for_f(const Profile& D, const PLFunction& f, double tau, int grid_n) {
    if (!(tau > 0.0 && tau <= 0.5)) throw InvalidArgument("tau must be in (0, 1/2]");
    if (grid_n < 1 || 1.0 / grid_n > tau / 8.0 * (1 + kRel)) {
        throw InvalidArgument("grid step must be at most tau/8");
    }
    std::vector<double> pts(static_cast<std::size_t>(grid_n) + 1);
    for (int i = 0; i <= grid_n; ++i) pts[i] = static_cast<double>(i) / grid_n;
    return sigma_on_points(D, f, tau, pts);
}

std::string certificate_id(const std::vector<int>& slopes) {
    std::uint64_t h = 1469598103934665603ull;
    for (int s : slopes) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(s));
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

class Searcher {
public:
    Searcher(const Profile& D, double t, double tau, const SearchOptions& opts)
        : D_(D), t_(t), tau_(tau), opts_(opts), d_(D.dim()) {
        grid_ = opts.grid_n > 0 ? opts.grid_n : default_grid(tau, opts.segments);
        lo_ = opts.general ? -opts.slope_levels : 0;
    }

    PLFunction build(const std::vector<int>& idx) const {
        std::vector<double> slopes(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            slopes[i] = static_cast<double>(idx[i]) * d_ / opts_.slope_levels;
        }
        return PLFunction::from_slopes(slopes);
    }

    bool budget_left() const { return evals_ < opts_.budget; }

    // Returns the value, +inf when infeasible or when the budget is spent.
    double evaluate(const std::vector<int>& idx) {
        auto it = memo_.find(idx);
        if (it != memo_.end()) return it->second;
        if (!budget_left()) return kInf;
        const PLFunction f = build(idx);
        double v = kInf;
        if (check_class(f, d_, t_).ok) {
            v = sigma_for_f(D_, f, tau_, grid_).value;
            ++evals_;
            consider(v, idx, f);
        }
        memo_.emplace(idx, v);
        return v;
    }

    void evaluate_seed(const PLFunction& f) {
        if (!budget_left() || !check_class(f, d_, t_).ok) return;
        const double v = sigma_for_f(D_, f, tau_, grid_).value;
        ++evals_;
        if (v < best_value_) {
            best_value_ = v;
            best_idx_.clear();
            best_f_ = f;
        }
    }

    void run_exhaustive(int segs) {
        std::vector<int> idx(segs, lo_);
        while (budget_left()) {
            evaluate(expand(idx));
            int p = segs - 1;
            while (p >= 0 && idx[p] == opts_.slope_levels) idx[p--] = lo_;
            if (p < 0) break;
            ++idx[p];
        }
    }

    void run_beam() {
        std::set<std::vector<int>> expanded;
        while (budget_left()) {
            std::vector<std::pair<double, std::vector<int>>> pool;
            for (const auto& [k, v] : memo_) {
                if (v < kInf && !expanded.count(k)) pool.emplace_back(v, k);
            }
            if (pool.empty()) break;
            const std::size_t take = std::min(opts_.beam, pool.size());
            std::partial_sort(pool.begin(), pool.begin() + take, pool.end());
            pool.resize(take);
            for (const auto& [v, k] : pool) {
                expanded.insert(k);
                for (const auto& nb : neighbours(k)) {
                    if (!budget_left()) return;
                    evaluate(nb);
                }
            }
        }
    }

    std::size_t total_candidates(int segs) const {
        const double per = opts_.slope_levels - lo_ + 1;
        const double c = std::pow(per, segs);
        return c > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(c);
    }

    SigmaTauResult result() const {
        SigmaTauResult r;
        r.evaluations = evals_;
        if (best_value_ == kInf) throw HypothesisViolated("no feasible candidate in the class");
        r.estimate = best_value_;
        r.certificate = best_f_;
        r.certificate_slopes = best_idx_;
        r.certificate_dec = sigma_for_f(D_, best_f_, tau_, grid_).dec;
        return r;
    }

private:
    std::vector<int> expand(const std::vector<int>& coarse) const {
        const int S = opts_.segments;
        const int C = static_cast<int>(coarse.size());
        std::vector<int> idx(S);
        for (int i = 0; i < S; ++i) idx[i] = coarse[static_cast<std::size_t>(i) * C / S];
        return idx;
    }

    std::vector<std::vector<int>> neighbours(const std::vector<int>& k) const {
        std::vector<std::vector<int>> out;
        const int S = static_cast<int>(k.size());
        const int hi = opts_.slope_levels;
        for (int i = 0; i < S; ++i) {
            for (int dlt : {-1, 1}) {
                auto nb = k;
                nb[i] += dlt;
                if (nb[i] >= lo_ && nb[i] <= hi) out.push_back(std::move(nb));
            }
        }
        for (int i = 0; i + 1 < S; ++i) {
            if (k[i] != k[i + 1]) {
                auto nb = k;
                std::swap(nb[i], nb[i + 1]);
                out.push_back(std::move(nb));
            }
            for (int dlt : {-1, 1}) {
                auto nb = k;
                nb[i] += dlt;
                nb[i + 1] -= dlt;
                if (nb[i] >= lo_ && nb[i] <= hi && nb[i + 1] >= lo_ && nb[i + 1] <= hi) {
                    out.push_back(std::move(nb));
                }
            }
        }
        return out;
    }

    void consider(double v, const std::vector<int>& idx, const PLFunction& f) {
        if (v < best_value_ || (v == best_value_ && !best_idx_.empty() && idx < best_idx_)) {
            best_value_ = v;
            best_idx_ = idx;
            best_f_ = f;
        }
    }

    const Profile& D_;
    double t_, tau_;
    SearchOptions opts_;
    double d_;
    int grid_ = 0;
    int lo_ = 0;
    std::size_t evals_ = 0;
    std::map<std::vector<int>, double> memo_;
    double best_value_ = kInf;
    std::vector<int> best_idx_;
    PLFunction best_f_;
};

}  // namespace

SigmaTauResult sigma_tau(const Profile& D, double t, double tau, const SearchOptions& opts,
                         const std::vector<PLFunction>& seeds) {
    if (!(t > 0.0 && t < D.dim())) throw InvalidArgument("sigma_tau needs t in (0,d)");
    if (opts.segments < 1 || opts.slope_levels < 1 || opts.coarse_segments < 1 ||
        opts.segments % opts.coarse_segments != 0) {
        throw InvalidArgument("search options: segments must be a multiple of coarse_segments");
    }
    Searcher s(D, t, tau, opts);
    for (const PLFunction& f : seeds) s.evaluate_seed(f);
    bool exhaustive = false;
    if (s.total_candidates(opts.segments) <= opts.budget) {
        s.run_exhaustive(opts.segments);
        exhaustive = true;
    } else {
        s.run_exhaustive(opts.coarse_segments);
        s.run_beam();
    }
    SigmaTauResult r = s.result();
    r.exhaustive = exhaustive;
    return r;
}

double profile_lipschitz(const Profile& D) {
    if (D.kind() == ProfileKind::HighDim || D.kind() == ProfileKind::KaufmanIdentity) return 1.0;
    if (D.kind() == ProfileKind::TrivialHalf) return 0.5;
    const int n = 20000;
    const double d = D.dim();
    double m = 0.0, prev = D(0.0);
    for (int i = 1; i <= n; ++i) {
        const double x = d * i / n;
        const double y = D(x);
        m = std::max(m, std::abs(y - prev) * n / d);
        prev = y;
    }
    return m;
}

ScanResult lipschitz_scan(const Profile& D, const std::vector<double>& ts, double tau,
                          const SearchOptions& opts) {
    if (!std::is_sorted(ts.begin(), ts.end())) throw InvalidArgument("t_range must be sorted");
    ScanResult out;
    const std::size_t n = ts.size();
    if (n == 0) return out;
    const double d = D.dim();
    std::vector<double> est(n);
    std::vector<PLFunction> cert(n);

    // Larger t gives a smaller class, so certificates found there are seeds below.
    for (std::size_t r = n; r-- > 0;) {
        std::vector<PLFunction> seeds;
        for (std::size_t k = r + 1; k < n; ++k) seeds.push_back(cert[k]);
        const auto res = sigma_tau(D, ts[r], tau, opts, seeds);
        est[r] = res.estimate;
        cert[r] = res.certificate;
    }

    const int grid = opts.grid_n > 0 ? opts.grid_n : default_grid(tau, opts.segments);
    // Lift certificates upward: raise slopes below (t+d)/2 by the gap constant.
    for (int round = 0; round < static_cast<int>(n) + 1; ++round) {
        bool changed = false;
        for (std::size_t r = 0; r + 1 < n; ++r) {
            const double s = ts[r], t = ts[r + 1];
            if (t >= d) continue;
            const double eta = (d + t) / (d - t) * (t - s);
            const PLFunction lifted = cert[r].with_raised_slopes((t + d) / 2.0, eta);
            if (!check_class(lifted, d, t, 1e-9).ok) continue;
            const double v = sigma_for_f(D, lifted, tau, grid).value;
            if (v < est[r + 1]) {
                est[r + 1] = v;
                cert[r + 1] = lifted;
                changed = true;
            }
        }
        for (std::size_t r = n - 1; r-- > 0;) {
            if (est[r + 1] < est[r]) {
                est[r] = est[r + 1];
                cert[r] = cert[r + 1];
                changed = true;
            }
        }
        if (!changed) break;
    }

    const double lip = profile_lipschitz(D);
    for (std::size_t r = 0; r < n; ++r) {
        ScanRow row;
        row.t = ts[r];
        row.estimate = est[r];
        if (r > 0) {
            const double dt = ts[r] - ts[r - 1];
            const double t = ts[r];
            row.increment_bound = t < d ? (d + t) / (d - t) * dt * lip : kInf;
            const double rise = est[r] - est[r - 1];
            row.within_bound = rise <= row.increment_bound + 1e-12;
            if (rise < -1e-12) out.monotone = false;
            if (dt > 0) out.modulus = std::max(out.modulus, rise / dt);
        }
        out.bounds_hold = out.bounds_hold && row.within_bound;
        out.rows.push_back(row);
    }
    return out;
}

PlanarReport verify_planar_bound(double u, double zeta, const EtaTable& eta, double tau,
                                 const SearchOptions& opts, int n_s, double base_slack) {
    PlanarReport rep;
    rep.u = u;
    rep.zeta = zeta;
    const double top = phi(u) - zeta;
    if (n_s <= 0 || top <= 0.0) return rep;
    for (int i = 1; i <= n_s; ++i) {
        PlanarRow row;
        row.s = top * i / n_s;
        row.tau = tau;
        const Profile D = Profile::planar(row.s, eta);
        const auto res = sigma_tau(D, u, tau, opts);
        row.estimate = res.estimate;
        row.margin = res.estimate - row.s;
        row.certificate_id = certificate_id(res.certificate_slopes);
        row.base_case = row.s <= u / 3.0;
        row.ok = row.margin > 0.0 && (!row.base_case || row.margin >= u / 100.0 - base_slack);
        rep.pass = rep.pass && row.ok;
        rep.rows.push_back(row);
    }
    return rep;
}

HighDimReport verify_highdim_bound(int d, const std::vector<double>& s_values, double tau,
                                   const SearchOptions& opts, double slack) {
    HighDimReport rep;
    rep.d = d;
    rep.t = d / 2.0;
    for (double s : s_values) {
        HighDimRow row;
        row.s = s;
        row.bound = (s + 1.0) / (d + 1.0);
        const auto res = sigma_tau(Profile::high_dim(d, s), rep.t, tau, opts);
        row.estimate = res.estimate;
        row.margin = res.estimate - (row.bound - slack);
        row.evaluations = res.evaluations;
        row.certificate_id = certificate_id(res.certificate_slopes);
        rep.pass = rep.pass && row.margin >= 0.0;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace dyadlab
