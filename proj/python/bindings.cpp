#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "dyadlab/analysis.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/experiment.hpp"
#include "dyadlab/generators.hpp"
#include "dyadlab/json_io.hpp"
#include "dyadlab/measure_io.hpp"
#include "dyadlab/sigma.hpp"

namespace py = pybind11;
using namespace dyadlab;
using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

DyadicMeasure from_points(const std::vector<std::vector<double>>& points, const std::vector<double>& weights,
                          int dim, int depth) {
    if (points.size() != weights.size()) throw InvalidArgument("points and weights differ in length");
    std::vector<Atom> atoms(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (static_cast<int>(points[i].size()) != dim) throw InvalidArgument("point of wrong dimension");
        for (int k = 0; k < dim; ++k) atoms[i].x[k] = points[i][k];
        atoms[i].weight = weights[i];
    }
    return build_from_atoms(atoms, dim, depth);
}

py::list leaves(const DyadicMeasure& mu) {
    py::list out;
    for (const Cell& c : mu.leaves()) {
        const Coords x = morton_decode(c.key, mu.dim(), mu.depth());
        py::tuple t(mu.dim());
        for (int k = 0; k < mu.dim(); ++k) t[k] = x[k];
        out.append(py::make_tuple(t, c.mass));
    }
    return out;
}

py::dict result_dict(const ExperimentResult& r) {
    py::dict d;
    d["scenario"] = r.scenario;
    d["generator"] = r.generator;
    d["frostman_t"] = r.frostman_t;
    d["exponent"] = r.exponent;
    d["target"] = r.target ? py::cast(*r.target) : py::none();
    d["single_scale_level"] = r.single_scale_level;
    d["single_scale"] = r.single_scale;
    d["degenerate"] = r.degenerate;
    d["pass"] = r.pass;
    py::list pins;
    for (const PinResult& p : r.pins) {
        py::dict q;
        q["pin"] = py::make_tuple(p.pin[0], p.pin[1]);
        q["tube_t"] = p.tube_t;
        q["exponent"] = p.exponent;
        q["levels"] = p.levels;
        q["log2_counts"] = p.log2_counts;
        pins.append(q);
    }
    d["pins"] = pins;
    return d;
}

}  // namespace

PYBIND11_MODULE(_dyadlab, m) {
    m.doc() = "Dyadic measures, multiscale entropy and distance-set experiments";

    // Later registrations are tried first, so subclasses come after the base.
    auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<HypothesisViolated>(m, "HypothesisViolated", base.ptr());

    py::class_<DyadicMeasure>(m, "DyadicMeasure")
        .def_property_readonly("dim", &DyadicMeasure::dim)
        .def_property_readonly("depth", &DyadicMeasure::depth)
        .def("is_trivial", &DyadicMeasure::is_trivial)
        .def("total_mass", &DyadicMeasure::total_mass)
        .def("normalized", &DyadicMeasure::normalized)
        .def("leaves", &leaves, "List of (coords, mass) at the finest level")
        .def("__len__", [](const DyadicMeasure& mu) { return mu.leaves().size(); });

    m.def("from_points", &from_points, py::arg("points"), py::arg("weights"), py::arg("dim"), py::arg("depth"));
    m.def("load_measure", &load_measure);
    m.def("save_measure", &save_measure);

    m.def("cantor_product", &cantor_product, py::arg("k"), py::arg("dim"), py::arg("depth"));
    m.def("lattice_falconer", &lattice_falconer, py::arg("q"), py::arg("dim"), py::arg("depth"));
    m.def("train_track", &train_track, py::arg("delta"), py::arg("depth"), py::arg("tracks") = -1);
    m.def("product_set", &product_set);
    m.def("random_digit_cantor", &random_digit_cantor, py::arg("digits"), py::arg("depth"), py::arg("seed"));

    m.def("box_count", py::overload_cast<const DyadicMeasure&, int>(&box_count));
    m.def("entropy", py::overload_cast<const DyadicMeasure&, int>(&entropy));
    m.def("robust_entropy", py::overload_cast<const DyadicMeasure&, int, double>(&robust_entropy));
    m.def("robust_entropy_of_masses", &robust_entropy_of_masses, py::arg("masses"), py::arg("theta"));
    m.def(
        "frostman_fit",
        [](const DyadicMeasure& mu, int lo, int hi) {
            const FrostmanFit f = frostman_fit(mu, lo, hi);
            py::dict d;
            d["s"] = f.s;
            d["C"] = f.C;
            d["residual"] = f.residual;
            return d;
        },
        py::arg("mu"), py::arg("level_lo"), py::arg("level_hi"));

    m.def("phi", &phi, py::arg("u"));
    m.def("c_d", &c_d, py::arg("d"));
    m.def(
        "sigma_for_f",
        [](const std::string& profile, const std::string& f, double tau, int grid) {
            const PLFunction g = pl_from_json(parse_json(f));
            const Profile D = profile_from_json(parse_json(profile));
            return sigma_for_f(D, g, tau, grid > 0 ? grid : default_grid(tau, static_cast<int>(g.segments()))).value;
        },
        py::arg("profile"), py::arg("f"), py::arg("tau"), py::arg("grid") = 0,
        "profile and f are JSON strings in the CLI formats");

    m.def(
        "run_experiment",
        [](const std::string& config) {
            py::list out;
            for (const SceneConfig& c : scenes_from_json(parse_json(config))) out.append(result_dict(run_experiment(c)));
            return out;
        },
        py::arg("config"), "config is SceneConfig JSON (object, array, or {scenes: [...]})");
}
