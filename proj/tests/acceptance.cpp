#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oracles.hpp"

#include "dyadlab/analysis.hpp"
#include "dyadlab/chain.hpp"
#include "dyadlab/experiment.hpp"
#include "dyadlab/generators.hpp"
#include "dyadlab/geometry.hpp"
#include "dyadlab/sigma.hpp"
#include "dyadlab/uniformize.hpp"

using namespace dyadlab;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Closed form, independent of the library's root finder.
double phi_closed(double u) { return ((u - 2) + std::sqrt((2 - u) * (2 - u) + 4 * u)) / 2; }

Outcome constants() {
    bool ok = std::abs(phi(1.0) - 0.618033988749895) <= 1e-12;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(1e-6, 1.0);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        worst = std::max(worst, std::abs(phi_residual(x, phi(x))));
    }
    ok = ok && worst <= 1e-12;
    const double t12 = 0.5 + phi(0.5) / 4;
    ok = ok && std::abs(t12 - 0.570194101601104) < 1e-12 && t12 > 0.57;
    return {ok, fmt("phi(1)=%.15f max_residual=%.1e 1/2+phi(1/2)/4=%.12f", phi(1.0), worst, t12)};
}

Outcome cd_table() {
    double worst = 0;
    for (int d = 4; d <= 9; ++d) {
        const double want = d % 2 ? phi_closed(0.5) / (d + 1) : (phi_closed(1.0) - 0.5) / (d + 1);
        worst = std::max(worst, std::abs(c_d(d) - want));
    }
    return {worst <= 1e-12, fmt("d=4..9 max_abs_err=%.1e", worst)};
}

Outcome highdim() {
    SearchOptions opts;
    opts.budget = 12000;
    const HighDimReport rep = verify_highdim_bound(3, {1.05, 1.2, 1.35, 1.45}, 0.02, opts, 0.01);
    std::string d;
    std::size_t evals = 0;
    for (const HighDimRow& r : rep.rows) {
        d += fmt("s=%.2f est=%.4f margin=%+.4f ", r.s, r.estimate, r.margin);
        evals += r.evaluations;
    }
    return {rep.pass && evals >= 10000 * rep.rows.size(), d + fmt("candidates=%zu", evals)};
}

Outcome planar() {
    SearchOptions opts;
    const PlanarReport rep = verify_planar_bound(1.0, 0.05, EtaTable::constant(0.01), 0.01, opts, 12);
    double min_margin = 1e9, min_base = 1e9;
    bool positive = !rep.rows.empty();
    for (const PlanarRow& r : rep.rows) {
        positive = positive && r.margin > 0;
        min_margin = std::min(min_margin, r.margin);
        if (r.base_case) min_base = std::min(min_base, r.margin);
    }
    const bool base_ok = min_base >= 1.0 / 100 - 0.005;
    return {positive && base_ok && rep.pass,
            fmt("rows=%zu min_margin=%.5f min_base_margin=%.4f", rep.rows.size(), min_margin, min_base)};
}

PLFunction random_nondecreasing(std::mt19937_64& rng, double d, int pieces) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xs{0.0}, ys{0.0}, cuts;
    for (int i = 0; i < pieces - 1; ++i) cuts.push_back(u(rng));
    std::sort(cuts.begin(), cuts.end());
    for (double c : cuts)
        if (c - xs.back() > 1e-3 && c < 1 - 1e-3) xs.push_back(c);
    xs.push_back(1.0);
    for (std::size_t i = 1; i < xs.size(); ++i) ys.push_back(ys.back() + d * u(rng) * (xs[i] - xs[i - 1]));
    return PLFunction(xs, ys);
}

Profile random_profile(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (rng() % 4) {
        case 0: return Profile::high_dim(3, 1.0 + u(rng));
        case 1: return Profile::planar(0.1 + 0.4 * u(rng), EtaTable::constant(0.01));
        case 2: return Profile::kaufman_identity(2, 0.5 + u(rng));
        default: return Profile::trivial_half(2);
    }
}

Outcome oracles() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> pts(17);
    for (int i = 0; i <= 16; ++i) pts[i] = i / 16.0;
    int dp_bad = 0;
    for (int it = 0; it < 50; ++it) {
        const Profile D = random_profile(rng);
        const PLFunction f = random_nondecreasing(rng, D.dim(), 1 + static_cast<int>(rng() % 6));
        const double tau = 1.0 / 16 + u(rng) * (0.5 - 1.0 / 16);
        if (sigma_on_points(D, f, tau, pts).value != oracle::sigma_exhaustive(D, f, tau, pts)) ++dp_bad;
    }
    int re_bad = 0, rc_bad = 0;
    for (int seed = 0; seed < 200; ++seed) {
        std::vector<double> m(1 + rng() % 12);
        double s = 0;
        for (auto& x : m) s += (x = 0.01 + u(rng));
        for (auto& x : m) x /= s;
        const double theta = 1.0 + 4.0 * u(rng);
        if (std::abs(robust_entropy_of_masses(m, theta) - oracle::robust_entropy_exhaustive(m, theta)) > 1e-9)
            ++re_bad;
    }
    for (int seed = 0; seed < 200; ++seed) {
        std::vector<double> m(1 + rng() % 20);
        double s = 0;
        for (auto& x : m) s += (x = std::pow(u(rng), 3) + 1e-3);
        for (auto& x : m) x /= s;
        const double r = 0.05 + 0.9 * u(rng);
        if (robustness_check_masses(m, 4, 0.5, r).min_count != oracle::min_count_exhaustive(m, r)) ++rc_bad;
    }
    return {dp_bad + re_bad + rc_bad == 0,
            fmt("dp_mismatch=%d/50 robust_entropy_mismatch=%d/200 robustness_mismatch=%d/200", dp_bad, re_bad,
                rc_bad)};
}

Outcome uniformization() {
    std::mt19937_64 rng(6);
    const int m = 8, T = 2, l = m / T;
    const double bound = std::pow(2.0 * 2 * T + 2, -l);
    int bad = 0;
    double min_retained = 1;
    for (int it = 0; it < 100; ++it) {
        const DyadicMeasure mu = build_from_atoms(oracle::random_atoms(rng, 200, 2), 2, m).normalized();
        const UniformPiece p = extract_uniform(mu, T);
        min_retained = std::min(min_retained, p.mass_retained);
        if (p.mass_retained < bound) ++bad;
        if (oracle::uniform_violations(restrict_to_keys(mu, p.keys), T, p.exponents) != 0) ++bad;
        const auto dec = decompose_uniform(mu, T, 0.2);
        if (!dec.covers || !dec.pieces_heavy) ++bad;
        std::set<MortonKey> seen;
        for (const auto& q : dec.pieces) {
            if (oracle::uniform_violations(restrict_to_keys(mu, q.keys), T, q.exponents) != 0) ++bad;
            if (q.mass_retained < std::exp2(-dec.eps_prime * m)) ++bad;
            for (MortonKey k : q.keys)
                if (!seen.insert(k).second) ++bad;
        }
    }
    return {bad == 0, fmt("violations=%d min_retained=%.4f bound=%.6f", bad, min_retained, bound)};
}

Outcome chain() {
    const auto panel = random_chain_panel({20, 12, 1});
    std::vector<ChainInstance> inst;
    bool robust_ok = panel.size() == 20;
    for (const auto& e : panel) {
        robust_ok = robust_ok && e.robust.rhs <= e.robust.rhs_plain + 1e-12;
        inst.push_back(e.instance);
    }
    const double C = fit_chain_constant(inst);
    bool holds = true;
    for (const auto& c : inst) holds = holds && c.sides.lhs >= c.sides.rhs - C * c.sides.J - 1e-9;
    return {C <= 8.0 && holds && robust_ok, fmt("instances=%zu C=%.4f robust_le_plain=%d", inst.size(), C,
                                                robust_ok ? 1 : 0)};
}

Outcome projection() {
    const std::vector<DirectionMeasure> rhos{uniform_arc(256, 0, 2 * pi), uniform_arc(256, 0, pi),
                                             cantor_arc(256, 0.6, 0, pi), cantor_arc(256, 0.8, 0, 2 * pi)};
    const double a = 0.1, b = 0.5;
    int pairs = 0, verified = 0, held = 0;
    double worst = 0;
    for (const auto& rho : rhos) {
        for (int k = 0; k < 5; ++k) {
            const DyadicMeasure mu = random_digit_cantor(3 + k % 3, 10, 100 + k).normalized();
            const ProjectionBound r = entropy_projection_bound(rho, mu, 10, a, b, 4.0, true);
            ++pairs;
            verified += r.precondition;
            held += r.precondition && r.bad_mass <= b;
            worst = std::max(worst, r.bad_mass);
        }
    }
    return {verified == 20 && held == 20,
            fmt("pairs=%d verified=%d bound_held=%d max_bad_mass=%.4f b=%.2f", pairs, verified, held, worst, b)};
}

Outcome desk_scale() {
    const json cfg{{"scenes",
                    {{{"scenario", "cantor"},
                      {"generator", {{"kind", "cantor_product"}, {"params", {{"ratio", 0.25}, {"d", 2}}}}},
                      {"depth", 16}},
                     {{"scenario", "train_track"},
                      {"generator", {{"kind", "train_track"}, {"params", {{"delta", 8}}}}},
                      {"depth", 16}}}}};
    const auto scenes = scenes_from_json(cfg);
    const ExperimentResult c = run_experiment(scenes[0]);
    const ExperimentResult t = run_experiment(scenes[1]);
    const bool window_ok = scenes[0].window_lo == 4 && scenes[0].window_hi == 14;
    const bool cantor_ok = !c.degenerate && window_ok && c.exponent >= phi(1.0) - 0.12 && c.exponent > 0.52;
    const bool track_ok = !t.degenerate && std::abs(t.single_scale - 0.5) <= 0.05 && t.exponent > 0.52;
    return {cantor_ok && track_ok,
            fmt("cantor t=%.3f exponent=%.4f target=%.4f; train_track single_scale(8)=%.4f exponent=%.4f",
                c.frostman_t, c.exponent, phi(1.0) - 0.12, t.single_scale, t.exponent)};
}

Outcome arc_audit() {
    const int level = 10;
    const DirectionMeasure rho = cantor_arc(1024, 0.6, 0, pi);
    const double K = arc_frostman_constant(rho, 0.6, std::ldexp(1.0, -level));
    const AuditResult r = adapted_audit(rho, cantor_product(2, 2, 12).normalized(), level, 0.55, 0.1);
    return {K <= 4.0 && r.failing_fraction <= 0.1,
            fmt("arc_frostman_K=%.3f mu_s=%.3f failing_fraction=%.4f audited=%d", K, r.frostman_s,
                r.failing_fraction, r.cells_audited)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadlab acceptance criteria"};
    std::vector<int> only, allow_fail;
    app.add_option("--only", only, "Run only these criteria");
    app.add_option("--allow-fail", allow_fail, "Criteria whose FAIL does not change the exit status");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "constants", 1, constants},
        {2, "c_d table", 1, cd_table},
        {3, "high-dimensional bound d=3 tau=0.02", 600, highdim},
        {4, "planar bound u=1 zeta=0.05 tau=0.01", 600, planar},
        {5, "DP and greedy oracle equivalence", 120, oracles},
        {6, "uniformization m=8 T=2", 60, uniformization},
        {7, "entropy chain panel", 300, chain},
        {8, "elementary projection bound", 120, projection},
        {9, "desk-scale distance sets", 900, desk_scale},
        {10, "adapted audit", 120, arc_audit},
    };

    int blocking = 0;
    for (const Criterion& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        std::printf("[%s] %2d %s (%.2f s, limit %.0f s) %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                    c.budget_s, o.detail.c_str(), in_time ? "" : " over time limit");
        std::fflush(stdout);
        if (!pass && std::find(allow_fail.begin(), allow_fail.end(), c.id) == allow_fail.end()) ++blocking;
    }
    return blocking == 0 ? 0 : 1;
}
