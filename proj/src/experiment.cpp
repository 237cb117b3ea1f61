#include "dyadlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "dyadlab/analysis.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/generators.hpp"
#include "dyadlab/geometry.hpp"
#include "dyadlab/measure_io.hpp"
#include "dyadlab/sigma.hpp"

namespace dyadlab {

namespace {

using nlohmann::json;

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("field '") + key + "': " + e.what());
    }
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const HypothesisViolated& e) {
        throw HypothesisViolated(std::string(stage) + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(std::string(stage) + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(std::string(stage) + ": " + e.what());
    } catch (const Error& e) {
        throw Error(std::string(stage) + ": " + e.what());
    }
}

int ratio_exponent(double r) {
    const int k = static_cast<int>(std::lround(-std::log2(r)));
    if (!(r > 0.0 && r <= 0.5) || std::ldexp(1.0, -k) != r) {
        throw InvalidArgument("cantor ratio must be 2^-k with k >= 1");
    }
    return k;
}

int generator_dim(const GeneratorSpec& g) {
    if (g.kind == "train_track" || g.kind == "circle_pair" || g.kind == "product_set") return 2;
    if (g.kind == "from_file") return -1;
    return get_or<int>(g.params, "d", 2);
}

DyadicMeasure build_generator(const GeneratorSpec& g, int depth) {
    const json& p = g.params;
    if (g.kind == "cantor_product") {
        return cantor_product(ratio_exponent(get_or<double>(p, "ratio", 0.25)), get_or<int>(p, "d", 2), depth);
    }
    if (g.kind == "lattice_falconer") {
        return lattice_falconer(get_or<int>(p, "q", 4), get_or<int>(p, "d", 2), depth);
    }
    if (g.kind == "train_track") {
        return train_track(get_or<int>(p, "delta", 8), depth, get_or<int>(p, "tracks", -1));
    }
    if (g.kind == "circle_pair") return circle_pair(depth);
    if (g.kind == "product_set") {
        if (!p.contains("factor")) throw InvalidArgument("product_set needs a 'factor' generator");
        GeneratorSpec f;
        f.kind = get_or<std::string>(p.at("factor"), "kind", "");
        f.params = p.at("factor").value("params", json::object());
        if (generator_dim(f) != 1) throw InvalidArgument("product_set factor must be one-dimensional");
        return product_set(build_generator(f, depth));
    }
    if (g.kind == "from_file") {
        const auto path = get_or<std::string>(p, "path", "");
        DyadicMeasure mu = load_measure(path);
        if (mu.depth() != depth) throw InvalidArgument("file depth differs from the scene depth");
        return mu;
    }
    throw InvalidArgument("unknown generator kind: " + g.kind);
}

struct Split {
    int axis = 0;
    double cut = 0.0;
    DyadicMeasure mu, nu;
    bool ok = false;
};

// Mass-balanced cut x_axis = c with a gap of 1/8 around it.
Split split_measure(const DyadicMeasure& m) {
    Split best;
    double best_min = 0.0;
    const double side = std::ldexp(1.0, -m.depth());
    const auto leaves = m.leaves();
    std::vector<Coords> coords;
    coords.reserve(leaves.size());
    for (const Cell& l : leaves) coords.push_back(m.cube(m.depth(), l.key).coords);
    for (int axis = 0; axis < m.dim(); ++axis) {
        for (int i = 5; i <= 59; ++i) {
            const double c = i / 64.0;
            double left = 0.0, right = 0.0;
            for (std::size_t k = 0; k < leaves.size(); ++k) {
                const double x = coords[k][axis] * side;
                if (x + side <= c - 1.0 / 16) left += leaves[k].mass;
                if (x >= c + 1.0 / 16) right += leaves[k].mass;
            }
            if (std::min(left, right) > best_min) {
                best_min = std::min(left, right);
                best.axis = axis;
                best.cut = c;
            }
        }
    }
    if (!(best_min > 0.0)) return best;
    std::vector<Cell> a, b;
    double hi_a = -1.0, lo_b = 2.0;
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        const Cell& l = leaves[k];
        const double x = coords[k][best.axis] * side;
        if (x + side <= best.cut - 1.0 / 16) {
            a.push_back(l);
            hi_a = std::max(hi_a, x + side);
        }
        if (x >= best.cut + 1.0 / 16) {
            b.push_back(l);
            lo_b = std::min(lo_b, x);
        }
    }
    if (lo_b - hi_a < 0.125) throw HypothesisViolated("split gap below 1/8");
    best.mu = DyadicMeasure::from_cells(m.dim(), m.depth(), std::move(a)).normalized();
    best.nu = DyadicMeasure::from_cells(m.dim(), m.depth(), std::move(b)).normalized();
    best.ok = true;
    return best;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::size_t selection_count(const std::string& sel, std::size_t panel) {
    if (sel == "all") return panel;
    if (sel.rfind("top", 0) == 0 && sel.size() > 3) {
        const int k = std::stoi(sel.substr(3));
        if (k < 1) throw InvalidArgument("pin selection needs top<k> with k >= 1");
        return std::min<std::size_t>(panel, k);
    }
    throw InvalidArgument("pin selection must be 'all' or 'top<k>'");
}

}  // namespace

SceneConfig scene_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("scene must be a JSON object");
    SceneConfig c;
    c.scenario = get_or<std::string>(j, "scenario", "");
    if (c.scenario.empty()) throw InvalidArgument("scene needs a 'scenario' name");
    if (!j.contains("generator") || !j.at("generator").is_object()) {
        throw ParseError("scene needs a 'generator' object");
    }
    c.generator.kind = get_or<std::string>(j.at("generator"), "kind", "");
    c.generator.params = j.at("generator").value("params", json::object());
    c.depth = get_or<int>(j, "depth", 16);
    if (j.contains("pins")) {
        c.pins.count = get_or<int>(j.at("pins"), "count", 32);
        c.pins.selection = get_or<std::string>(j.at("pins"), "selection", "top8");
    }
    if (j.contains("scale_window")) {
        const json& w = j.at("scale_window");
        if (w.is_array() && w.size() == 2) {
            c.window_lo = w[0].get<int>();
            c.window_hi = w[1].get<int>();
        } else if (w.is_object()) {
            c.window_lo = get_or<int>(w, "lo", -1);
            c.window_hi = get_or<int>(w, "hi", -1);
        } else {
            throw ParseError("scale_window must be [lo, hi] or {lo, hi}");
        }
    }
    c.zeta = get_or<double>(j, "zeta", 0.12);
    if (j.contains("single_scale_level")) c.single_scale_level = get_or<int>(j, "single_scale_level", 0);
    c.output = get_or<std::string>(j, "output", "");

    const int d = generator_dim(c.generator);
    const int cap = d == 3 ? 14 : 20;
    if (c.depth < 8 || c.depth > cap) throw InvalidArgument("depth out of range for this dimension");
    if (c.pins.count < 1) throw InvalidArgument("pin count must be positive");
    selection_count(c.pins.selection, 1);
    if (c.window_lo < 0) c.window_lo = 4;
    if (c.window_hi < 0) c.window_hi = c.depth - 2;
    if (!(c.window_lo < c.window_hi && c.window_hi <= c.depth)) throw InvalidArgument("bad scale window");
    if (!(c.zeta >= 0.0)) throw InvalidArgument("zeta must be nonnegative");
    return c;
}

std::vector<SceneConfig> scenes_from_json(const json& j) {
    std::vector<SceneConfig> out;
    if (j.is_array()) {
        for (const json& s : j) out.push_back(scene_from_json(s));
    } else if (j.is_object() && j.contains("scenes")) {
        for (const json& s : j.at("scenes")) out.push_back(scene_from_json(s));
    } else {
        out.push_back(scene_from_json(j));
    }
    return out;
}

json scene_to_json(const SceneConfig& c) {
    json j{{"scenario", c.scenario},
           {"generator", {{"kind", c.generator.kind}, {"params", c.generator.params}}},
           {"depth", c.depth},
           {"pins", {{"count", c.pins.count}, {"selection", c.pins.selection}}},
           {"scale_window", {c.window_lo, c.window_hi}},
           {"zeta", c.zeta},
           {"output", c.output}};
    if (c.single_scale_level) j["single_scale_level"] = *c.single_scale_level;
    return j;
}

int scene_dim(const SceneConfig& c) { return generator_dim(c.generator); }

DyadicMeasure build_scene_measure(const SceneConfig& c) {
    return staged("generate", [&] { return build_generator(c.generator, c.depth); });
}

ExperimentResult run_experiment(const SceneConfig& c) {
    ExperimentResult res;
    res.scenario = c.scenario;
    res.generator = c.generator.kind;
    res.depth = c.depth;
    res.zeta = c.zeta;

    const DyadicMeasure full = build_scene_measure(c);
    res.dim = full.dim();
    if (full.is_trivial()) {
        res.degenerate = true;
        res.note = "trivial measure";
        return res;
    }
    const DyadicMeasure m = full.normalized();
    res.frostman_t = staged("frostman", [&] {
        return frostman_fit(m, c.window_lo, c.window_hi).s;
    });
    if (res.dim == 2) {
        // phi(u) -> 0 as u -> 0; phi itself only takes u in (0, 1].
        const double t = std::min(res.frostman_t, 1.0);
        res.target = (t > 0 ? phi(t) : 0.0) - c.zeta;
        res.target_source = "pinned distance lower bound phi(min(t,1)) - zeta";
    } else {
        res.target_source = "none for this dimension";
    }

    const Split split = staged("split", [&] { return split_measure(m); });
    if (!split.ok) {
        res.degenerate = true;
        res.note = "no mass-balanced split with gap 1/8";
        return res;
    }
    res.split_axis = split.axis;
    res.split_cut = split.cut;

    std::vector<int> r_levels;
    for (int k = 5; k <= std::min(10, c.depth - 2); ++k) r_levels.push_back(k);
    ThinTubeOptions topts;
    topts.pins = c.pins.count;
    const auto profiles = staged("tubes", [&] {
        return thin_tubes_profile(split.mu, split.nu, r_levels, topts);
    });

    std::vector<std::size_t> order(profiles.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return profiles[a].t > profiles[b].t; });
    order.resize(selection_count(c.pins.selection, order.size()));

    res.single_scale_level = c.single_scale_level.value_or(
        c.generator.kind == "train_track" ? get_or<int>(c.generator.params, "delta", 8) : 0);
    const int out_depth = std::max(c.window_hi, res.single_scale_level);

    staged("distance", [&] {
        for (std::size_t idx : order) {
            PinResult pr;
            pr.pin = profiles[idx].pin;
            pr.tube_t = profiles[idx].t;
            const LineMeasure lm = pinned_distance(split.nu, pr.pin, out_depth);
            std::vector<double> xs;
            for (int n = c.window_lo; n <= c.window_hi; ++n) {
                pr.levels.push_back(n);
                pr.log2_counts.push_back(std::log2(static_cast<double>(lm.box_count_at(n))));
                xs.push_back(n);
            }
            pr.exponent = ls_slope(xs, pr.log2_counts);
            if (res.single_scale_level > 0) {
                pr.single_scale = std::log2(static_cast<double>(lm.box_count_at(res.single_scale_level))) /
                                  res.single_scale_level;
            }
            res.pins.push_back(std::move(pr));
        }
        return 0;
    });
    std::stable_sort(res.pins.begin(), res.pins.end(),
                     [](const PinResult& a, const PinResult& b) { return a.exponent > b.exponent; });
    if (!res.pins.empty()) {
        res.exponent = res.pins.front().exponent;
        res.single_scale = res.pins.front().single_scale;
        for (const PinResult& p : res.pins) res.single_scale = std::max(res.single_scale, p.single_scale);
    }
    res.pass = res.target ? res.exponent >= *res.target : true;
    return res;
}

std::string summary_header() {
    return "scenario,generator,dim,depth,frostman_t,split_axis,split_cut,pins,best_pin_x,best_pin_y,"
           "exponent,target,zeta,single_scale_level,single_scale,degenerate,pass,target_source";
}

std::string summary_row(const ExperimentResult& r) {
    std::string s = r.scenario + ',' + r.generator + ',' + std::to_string(r.dim) + ',' +
                    std::to_string(r.depth) + ',' + num(r.frostman_t) + ',' +
                    std::to_string(r.split_axis) + ',' + num(r.split_cut) + ',' +
                    std::to_string(r.pins.size()) + ',';
    if (r.pins.empty()) {
        s += ",,";
    } else {
        s += num(r.pins.front().pin[0]) + ',' + num(r.pins.front().pin[1]) + ',';
    }
    s += num(r.exponent) + ',' + (r.target ? num(*r.target) : std::string()) + ',' + num(r.zeta) + ',' +
         std::to_string(r.single_scale_level) + ',' + num(r.single_scale) + ',' +
         (r.degenerate ? "1" : "0") + ',' + (r.pass ? "1" : "0") + ',' + r.target_source;
    return s;
}

void emit_report(const std::vector<ExperimentResult>& results, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path base(dir);
    std::ofstream csv(base / "summary.csv");
    if (!csv) throw InvalidArgument("cannot write to " + dir);
    csv << summary_header() << '\n';
    for (const ExperimentResult& r : results) {
        csv << summary_row(r) << '\n';
        for (std::size_t k = 0; k < r.pins.size(); ++k) {
            const fs::path f = base / (r.scenario + "_pin" + std::to_string(k) + ".dat");
            std::ofstream out(f);
            if (!out) throw InvalidArgument("cannot write " + f.string());
            out << "# level log2_count\n";
            for (std::size_t i = 0; i < r.pins[k].levels.size(); ++i) {
                out << r.pins[k].levels[i] << ' ' << num(r.pins[k].log2_counts[i]) << '\n';
            }
        }
    }
    if (!csv) throw InvalidArgument("write failed for " + dir);
}

}  // namespace dyadlab
