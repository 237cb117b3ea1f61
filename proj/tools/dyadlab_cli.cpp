#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dyadlab/analysis.hpp"
#include "dyadlab/chain.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/experiment.hpp"
#include "dyadlab/generators.hpp"
#include "dyadlab/geometry.hpp"
#include "dyadlab/json_io.hpp"
#include "dyadlab/measure_io.hpp"
#include "dyadlab/sigma.hpp"

using namespace dyadlab;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

Point parse_point(const std::string& s) {
    Point p{};
    std::stringstream ss(s);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= kMaxDim) throw InvalidArgument("too many pin coordinates");
        try {
            p[i++] = std::stod(tok);
        } catch (const std::exception&) {
            throw InvalidArgument("bad pin coordinate: " + tok);
        }
    }
    if (i < 2) throw InvalidArgument("pin needs at least two coordinates");
    return p;
}

json read_json_arg(const std::string& arg) {
    try {
        if (!arg.empty() && (arg.front() == '{' || arg.front() == '[' ||
                             std::isdigit(static_cast<unsigned char>(arg.front())))) {
            return json::parse(arg);
        }
        std::ifstream in(arg);
        if (!in) throw ParseError("cannot open " + arg);
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad JSON: ") + e.what());
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

void write_plot(const std::string& path, const std::vector<std::pair<double, double>>& pts) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path);
    for (const auto& [x, y] : pts) out << num(x) << ' ' << num(y) << '\n';
}

double ls_slope(const std::vector<std::pair<double, double>>& pts) {
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxy = 0, sxx = 0;
    for (const auto& [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

DyadicMeasure atoms_from_csv(const std::string& path, int dim, int depth) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::vector<Atom> atoms;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto v = [&] {
            try {
                return parse_list(line);
            } catch (const std::exception&) {
                if (lineno == 1) return std::vector<double>{};  // header
                throw ParseError("line " + std::to_string(lineno) + ": not numeric");
            }
        }();
        if (v.empty()) continue;
        if (static_cast<int>(v.size()) != dim + 1) {
            throw ParseError("line " + std::to_string(lineno) + ": expected d coordinates and a weight");
        }
        Atom a;
        for (int i = 0; i < dim; ++i) a.x[i] = v[i];
        a.weight = v[dim];
        atoms.push_back(a);
    }
    return build_from_atoms(atoms, dim, depth);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dyadic measure lab: entropy, projections and combinatorial bounds"};
    app.require_subcommand(1);
    int status = kPass;

    // measure build | info
    auto* measure = app.add_subcommand("measure", "Build or inspect a dyadic measure");
    measure->require_subcommand(1);
    auto* mbuild = measure->add_subcommand("build", "Build a measure from a generator or an atom CSV");
    std::string gen_kind, gen_params = "{}", atoms_path, out_path;
    int depth = 12, dim = 2;
    mbuild->add_option("--kind", gen_kind, "Generator kind");
    mbuild->add_option("--params", gen_params, "Generator parameters (JSON)");
    mbuild->add_option("--atoms", atoms_path, "CSV of x1,...,xd,weight rows");
    mbuild->add_option("--dim", dim, "Dimension for --atoms")->check(CLI::Range(1, 3));
    mbuild->add_option("--depth", depth, "Finest level")->check(CLI::Range(0, 40));
    mbuild->add_option("--out", out_path, "Output file")->required();
    mbuild->callback([&] {
        DyadicMeasure mu;
        if (!atoms_path.empty()) {
            mu = atoms_from_csv(atoms_path, dim, depth);
        } else {
            if (gen_kind.empty()) throw InvalidArgument("give --kind or --atoms");
            SceneConfig c;
            c.scenario = "build";
            c.generator.kind = gen_kind;
            c.generator.params = read_json_arg(gen_params);
            c.depth = depth;
            mu = build_scene_measure(c);
        }
        save_measure(out_path, mu);
        std::cout << "dim,depth,leaves,total_mass\n"
                  << mu.dim() << ',' << mu.depth() << ',' << mu.leaves().size() << ','
                  << num(mu.total_mass()) << '\n';
    });

    auto* minfo = measure->add_subcommand("info", "Summary of a measure file");
    std::string in_path;
    minfo->add_option("file", in_path)->required();
    minfo->callback([&] {
        const DyadicMeasure mu = load_measure(in_path);
        std::cout << "dim,depth,leaves,total_mass,normalized,entropy_bits\n"
                  << mu.dim() << ',' << mu.depth() << ',' << mu.leaves().size() << ','
                  << num(mu.total_mass()) << ',' << (mu.is_normalized() ? 1 : 0) << ','
                  << num(mu.is_trivial() ? 0.0 : entropy(mu.normalized(), mu.depth())) << '\n';
    });

    // dims
    auto* dims = app.add_subcommand("dims", "Per-level box counts, entropy and a Frostman fit");
    int lo = 1, hi = -1;
    std::string plot_path;
    dims->add_option("file", in_path)->required();
    dims->add_option("--lo", lo, "Coarsest level of the fit");
    dims->add_option("--hi", hi, "Finest level of the fit (default depth)");
    dims->add_option("--plot", plot_path, "Write level, log2 box count");
    dims->callback([&] {
        const DyadicMeasure mu = load_measure(in_path).normalized();
        if (hi < 0) hi = mu.depth();
        std::cout << "level,box_count,entropy_bits,log2_max_mass\n";
        std::vector<std::pair<double, double>> pts;
        for (int n = 0; n <= mu.depth(); ++n) {
            const auto m = level_masses(mu, n);
            double mx = 0.0;
            for (double x : m) mx = std::max(mx, x);
            std::cout << n << ',' << m.size() << ',' << num(entropy_of_masses(m)) << ','
                      << num(std::log2(mx)) << '\n';
            pts.emplace_back(n, std::log2(static_cast<double>(m.size())));
        }
        write_plot(plot_path, pts);
        const FrostmanFit fit = frostman_fit(mu, lo, hi);
        std::cerr << "frostman s=" << num(fit.s) << " C=" << num(fit.C) << " levels " << fit.level_lo
                  << ".." << fit.level_hi << '\n';
    });

    // distance --pin
    auto* dist = app.add_subcommand("distance", "Pinned distance measure: counts and exponent");
    std::string pin_s;
    int wlo = 4, whi = -1;
    dist->add_option("file", in_path)->required();
    dist->add_option("--pin", pin_s, "Pin as x,y[,z]")->required();
    dist->add_option("--lo", wlo, "Coarsest fitted level");
    dist->add_option("--hi", whi, "Finest fitted level (default depth - 2)");
    dist->add_option("--plot", plot_path, "Write level, log2 box count");
    dist->callback([&] {
        const DyadicMeasure mu = load_measure(in_path).normalized();
        if (whi < 0) whi = mu.depth() - 2;
        if (!(wlo < whi)) throw InvalidArgument("need lo < hi");
        const LineMeasure lm = pinned_distance(mu, parse_point(pin_s), whi);
        std::cout << "level,box_count,entropy_bits\n";
        std::vector<std::pair<double, double>> pts;
        for (int n = wlo; n <= whi; ++n) {
            std::cout << n << ',' << lm.box_count_at(n) << ',' << num(lm.entropy_at(n)) << '\n';
            pts.emplace_back(n, std::log2(static_cast<double>(lm.box_count_at(n))));
        }
        write_plot(plot_path, pts);
        std::cerr << "exponent=" << num(ls_slope(pts)) << '\n';
    });

    // radial --pin
    auto* radial = app.add_subcommand("radial", "Radial projection from a pin");
    int cells = 1024;
    radial->add_option("file", in_path)->required();
    radial->add_option("--pin", pin_s, "Pin as x,y[,z]")->required();
    radial->add_option("--cells", cells, "Direction cells")->check(CLI::PositiveNumber);
    radial->callback([&] {
        const DyadicMeasure mu = load_measure(in_path).normalized();
        const DirectionMeasure rho = project_radial(mu, parse_point(pin_s), cells);
        std::cout << "cell,x,y,z,mass\n";
        for (int i = 0; i < rho.size(); ++i) {
            if (!(rho.mass(i) > 0.0)) continue;
            const Point v = rho.direction(i);
            std::cout << i << ',' << num(v[0]) << ',' << num(v[1]) << ',' << num(v[2]) << ','
                      << num(rho.mass(i)) << '\n';
        }
    });

    // tubes
    auto* tubes = app.add_subcommand("tubes", "Thin-tube profile of nu seen from pins of mu");
    std::string nu_path, r_levels_s = "5,6,7,8";
    int pins = 32, remove_top = 0;
    tubes->add_option("mu", in_path)->required();
    tubes->add_option("nu", nu_path)->required();
    tubes->add_option("--r-levels", r_levels_s, "Radius exponents k, r = 2^-k");
    tubes->add_option("--pins", pins, "Pin panel size")->check(CLI::PositiveNumber);
    tubes->add_option("--remove-top", remove_top, "Worst tubes deleted per pin");
    tubes->callback([&] {
        std::vector<int> ks;
        for (double k : parse_list(r_levels_s)) ks.push_back(static_cast<int>(k));
        const auto prof = thin_tubes_profile(load_measure(in_path).normalized(),
                                             load_measure(nu_path).normalized(), ks, {pins, remove_top});
        std::cout << "pin_x,pin_y,pin_z,t,K,c\n";
        for (const auto& p : prof) {
            std::cout << num(p.pin[0]) << ',' << num(p.pin[1]) << ',' << num(p.pin[2]) << ',' << num(p.t)
                      << ',' << num(p.K) << ',' << num(p.c) << '\n';
        }
    });

    // sigma
    auto* sigma = app.add_subcommand("sigma", "Combinatorial parameter and constants");
    sigma->require_subcommand(1);
    double u = 1.0, tau = 0.02, t = 1.5, zeta = 0.05, slack = 0.01;
    int grid = 0, ns = 12, d = 3, dmin = 4, dmax = 9;
    std::size_t budget = 12000;
    std::string profile_s, f_s, eta_s = "0.01", s_list = "1.05,1.2,1.35,1.45";

    auto* sphi = sigma->add_subcommand("phi", "phi(u), the positive root of x^2 + (2-u)x - u");
    sphi->add_option("--u", u, "u in (0,1]")->required();
    sphi->callback([&] {
        std::cout << "u,phi,residual\n"
                  << num(u) << ',' << num(phi(u)) << ',' << num(phi_residual(u, phi(u))) << '\n';
    });

    auto* scd = sigma->add_subcommand("cdtable", "Exponents c_d");
    scd->add_option("--dmin", dmin)->check(CLI::Range(4, 1000));
    scd->add_option("--dmax", dmax)->check(CLI::Range(4, 1000));
    scd->callback([&] {
        std::cout << "d,parity,c_d\n";
        for (int k = dmin; k <= dmax; ++k) {
            std::cout << k << ',' << (k % 2 ? "odd" : "even") << ',' << num(c_d(k)) << '\n';
        }
    });

    auto* seval = sigma->add_subcommand("eval", "Sigma_tau(D; f) for one f");
    seval->add_option("--profile", profile_s, "Profile JSON or file")->required();
    seval->add_option("--f", f_s, "PL function JSON or file")->required();
    seval->add_option("--tau", tau)->required();
    seval->add_option("--grid", grid, "Grid size (default from tau)");
    seval->callback([&] {
        const Profile D = profile_from_json(read_json_arg(profile_s));
        const PLFunction f = pl_from_json(read_json_arg(f_s));
        const int n = grid > 0 ? grid : default_grid(tau, static_cast<int>(f.segments()));
        const SigmaValue v = sigma_for_f(D, f, tau, n);
        std::cout << "a,b,sigma,weight\n";
        for (const Interval& iv : v.dec.entries) {
            std::cout << num(iv.a) << ',' << num(iv.b) << ',' << num(iv.sigma) << ','
                      << num((iv.b - iv.a) * D(iv.sigma)) << '\n';
        }
        std::cerr << "value=" << num(v.value) << " grid=" << n << '\n';
    });

    auto* sinf = sigma->add_subcommand("inf", "Adversarial search for inf over the class L_{d,t}");
    sinf->add_option("--profile", profile_s, "Profile JSON or file")->required();
    sinf->add_option("--t", t)->required();
    sinf->add_option("--tau", tau)->required();
    sinf->add_option("--budget", budget);
    sinf->callback([&] {
        const Profile D = profile_from_json(read_json_arg(profile_s));
        SearchOptions opts;
        opts.budget = budget;
        const SigmaTauResult r = sigma_tau(D, t, tau, opts);
        std::cout << "estimate,evaluations,exhaustive,certificate_id\n"
                  << num(r.estimate) << ',' << r.evaluations << ',' << (r.exhaustive ? 1 : 0) << ','
                  << certificate_id(r.certificate_slopes) << '\n';
        std::cerr << "certificate " << pl_to_json(r.certificate).dump() << '\n';
    });

    auto* splanar = sigma->add_subcommand("verify-planar", "Planar combinatorial bound on an s-grid");
    splanar->add_option("--u", u);
    splanar->add_option("--zeta", zeta);
    splanar->add_option("--eta", eta_s, "Constant or table JSON");
    splanar->add_option("--tau", tau);
    splanar->add_option("--ns", ns, "Grid size for s");
    splanar->add_option("--budget", budget);
    splanar->callback([&] {
        SearchOptions opts;
        opts.budget = budget;
        const PlanarReport rep = verify_planar_bound(u, zeta, eta_from_json(read_json_arg(eta_s)), tau, opts, ns);
        std::cout << "s,tau,estimate,margin,base_case,ok,certificate_id\n";
        for (const PlanarRow& r : rep.rows) {
            std::cout << num(r.s) << ',' << num(r.tau) << ',' << num(r.estimate) << ',' << num(r.margin) << ','
                      << (r.base_case ? 1 : 0) << ',' << (r.ok ? 1 : 0) << ',' << r.certificate_id << '\n';
        }
        status = rep.pass ? kPass : kFail;
    });

    auto* shigh = sigma->add_subcommand("verify-highdim", "High-dimensional bound (s+1)/(d+1)");
    shigh->add_option("--d", d)->check(CLI::Range(2, 16));
    shigh->add_option("--s", s_list, "Comma separated s values");
    shigh->add_option("--tau", tau);
    shigh->add_option("--budget", budget);
    shigh->add_option("--slack", slack);
    shigh->callback([&] {
        SearchOptions opts;
        opts.budget = budget;
        const HighDimReport rep = verify_highdim_bound(d, parse_list(s_list), tau, opts, slack);
        std::cout << "s,bound,estimate,margin,evaluations,certificate_id\n";
        for (const HighDimRow& r : rep.rows) {
            std::cout << num(r.s) << ',' << num(r.bound) << ',' << num(r.estimate) << ',' << num(r.margin)
                      << ',' << r.evaluations << ',' << r.certificate_id << '\n';
        }
        status = rep.pass ? kPass : kFail;
    });

    // chain run
    auto* chain = app.add_subcommand("chain", "Multiscale entropy chain");
    chain->require_subcommand(1);
    auto* crun = chain->add_subcommand("run", "Chain sides on a random panel or one measure");
    int count = 20, m = 12;
    std::uint64_t seed = 1;
    double max_c = 8.0;
    std::string schedule_s, kind_s = "pinned_distance";
    crun->add_option("--measure", in_path, "Single measure file (otherwise a random panel)");
    crun->add_option("--pin", pin_s, "Pin for --measure");
    crun->add_option("--schedule", schedule_s, "A:B pairs, comma separated, for --measure");
    crun->add_option("--kind", kind_s, "pinned_distance or radial_2d");
    crun->add_option("--count", count)->check(CLI::PositiveNumber);
    crun->add_option("--depth", m)->check(CLI::Range(4, 20));
    crun->add_option("--seed", seed);
    crun->add_option("--max-c", max_c, "Fail when the fitted constant exceeds this");
    crun->callback([&] {
        std::vector<ChainInstance> panel;
        bool robust_ok = true;
        if (!in_path.empty()) {
            const DyadicMeasure mu = load_measure(in_path).normalized();
            ScaleSchedule s;
            s.M = mu.depth();
            std::stringstream ss(schedule_s);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                const auto colon = tok.find(':');
                if (colon == std::string::npos) throw InvalidArgument("schedule entries are A:B");
                s.intervals.emplace_back(std::stoi(tok.substr(0, colon)), std::stoi(tok.substr(colon + 1)));
            }
            ChainInstance inst;
            inst.id = in_path;
            inst.kind = map_kind_from_string(kind_s);
            inst.m = s.M;
            inst.sides = chain_sides(mu, inst.kind, parse_point(pin_s), s);
            panel.push_back(inst);
        } else {
            for (const PanelEntry& e : random_chain_panel({count, m, seed})) {
                panel.push_back(e.instance);
                robust_ok = robust_ok && e.robust.rhs <= e.robust.rhs_plain + 1e-12;
            }
        }
        write_chain_panel(std::cout, panel);
        const double c = fit_chain_constant(panel);
        std::cerr << "fitted C=" << num(c) << " robust_le_plain=" << (robust_ok ? 1 : 0) << '\n';
        status = (c <= max_c && robust_ok) ? kPass : kFail;
    });

    // audit adapted | entropy-proj
    auto* audit = app.add_subcommand("audit", "Projection audits against a direction measure");
    audit->require_subcommand(1);
    double arc_dim = 0.6, arc_lo = 0.0, arc_hi = M_PI, s_val = 0.55, eps = 0.1, max_frac = 0.1;
    double a_val = 0.1, b_val = 0.5, fitted = 4.0;
    int level = 10;
    auto add_arc = [&](CLI::App* sub) {
        sub->add_option("--measure", in_path, "Measure file")->required();
        sub->add_option("--arc-dim", arc_dim, "Dimension of the Cantor arc measure (0 for uniform)");
        sub->add_option("--arc-lo", arc_lo);
        sub->add_option("--arc-hi", arc_hi);
        sub->add_option("--cells", cells, "Direction cells")->check(CLI::PositiveNumber);
        sub->add_option("--level", level);
    };
    auto make_rho = [&] {
        return arc_dim > 0.0 ? cantor_arc(cells, arc_dim, arc_lo, arc_hi) : uniform_arc(cells, arc_lo, arc_hi);
    };
    auto* aad = audit->add_subcommand("adapted", "Fraction of directions with non-robust projections");
    add_arc(aad);
    aad->add_option("--s", s_val);
    aad->add_option("--eps", eps);
    aad->add_option("--max-fraction", max_frac);
    aad->callback([&] {
        const AuditResult r = adapted_audit(make_rho(), load_measure(in_path).normalized(), level, s_val, eps);
        std::cout << "failing_fraction,cells_audited,cells_failing,frostman_s\n"
                  << num(r.failing_fraction) << ',' << r.cells_audited << ',' << r.cells_failing << ','
                  << num(r.frostman_s) << '\n';
        status = r.failing_fraction <= max_frac ? kPass : kFail;
    });
    auto* aep = audit->add_subcommand("entropy-proj", "Mass of directions with low projected entropy");
    add_arc(aep);
    aep->add_option("--a", a_val);
    aep->add_option("--b", b_val);
    aep->add_option("--C", fitted, "Fitted constant in bits");
    aep->callback([&] {
        const ProjectionBound r =
            entropy_projection_bound(make_rho(), load_measure(in_path), level, a_val, b_val, fitted, true);
        std::cout << "bad_mass,concentration,threshold,precondition,bound_holds\n"
                  << num(r.bad_mass) << ',' << num(r.concentration) << ',' << num(r.threshold) << ','
                  << (r.precondition ? 1 : 0) << ',' << (r.bound_holds ? 1 : 0) << '\n';
        status = (!r.precondition || r.bound_holds) ? kPass : kFail;
        if (!r.precondition) std::cerr << "precondition unverified: concentration exceeds b\n";
    });

    // experiment run
    auto* exp = app.add_subcommand("experiment", "Distance-set experiments");
    exp->require_subcommand(1);
    auto* erun = exp->add_subcommand("run", "Run the scenes of a config file");
    std::string config_path, out_dir;
    erun->add_option("config", config_path, "SceneConfig JSON (object, array, or {scenes: [...]})")->required();
    erun->add_option("--out", out_dir, "Output directory (default: the config's output field)");
    erun->callback([&] {
        const auto scenes = scenes_from_json(read_json_arg(config_path));
        std::vector<ExperimentResult> results;
        for (const SceneConfig& c : scenes) results.push_back(run_experiment(c));
        std::string dir = out_dir;
        if (dir.empty() && !scenes.empty()) dir = scenes.front().output;
        if (!dir.empty()) emit_report(results, dir);
        std::cout << summary_header() << '\n';
        bool all = true;
        for (const auto& r : results) {
            std::cout << summary_row(r) << '\n';
            all = all && r.pass;
        }
        status = all ? kPass : kFail;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const HypothesisViolated& e) {
        std::cerr << "hypothesis violated: " << e.what() << '\n';
        return kFail;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad number: " << e.what() << '\n';
        return kUsage;
    }
    return status;
}
