#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "dyadlab/analysis.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/experiment.hpp"
#include "dyadlab/generators.hpp"
#include "dyadlab/geometry.hpp"
#include "dyadlab/measure_io.hpp"
#include "dyadlab/sigma.hpp"

using namespace dyadlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dyadlab_test_" + name);
    fs::remove_all(p);
    return p;
}

SceneConfig cantor_scene(int depth) {
    return scene_from_json(json{{"scenario", "cantor"},
                                {"generator", {{"kind", "cantor_product"}, {"params", {{"ratio", 0.25}, {"d", 2}}}}},
                                {"depth", depth}});
}

}  // namespace

TEST_CASE("generator exponents on aligned windows") {
    CHECK(frostman_fit(cantor_product(2, 2, 14), 4, 14).s == doctest::Approx(1.0).epsilon(0.05));
    CHECK(frostman_fit(cantor_product(2, 1, 14), 4, 14).s == doctest::Approx(0.5).epsilon(0.05));
    CHECK(frostman_fit(lattice_falconer(4, 2, 12), 2, 12).s == doctest::Approx(1.0).epsilon(0.05));
    CHECK(frostman_fit(product_set(cantor_product(2, 1, 12)), 2, 12).s == doctest::Approx(1.0).epsilon(0.05));
    CHECK(frostman_fit(circle_pair(12), 4, 12).s == doctest::Approx(1.0).epsilon(0.05));

    const DyadicMeasure pt = DyadicMeasure::from_leaves(1, 8, {{{7, 0, 0}, 1.0}});
    CHECK(product_set(pt).leaves().size() == 1);
    const DyadicMeasure leb = product_set(cantor_product(1, 1, 6));
    CHECK(leb.leaves().size() == 4096);
}

TEST_CASE("generator closed-form box counts") {
    const DyadicMeasure c = cantor_product(2, 1, 12);
    for (int j = 0; j <= 12; ++j) CHECK(box_count(c, j) == oracle::cantor_quarter_count_1d(j));
    // lattice q = 16: digits 0..3 in base 16 per coordinate.
    const DyadicMeasure lf = lattice_falconer(16, 2, 12);
    for (int g = 0; g <= 3; ++g) CHECK(box_count(lf, 4 * g) == static_cast<std::size_t>(std::pow(16, g)));
    CHECK_THROWS_AS(cantor_product(2, 2, 13), InvalidArgument);
}

TEST_CASE("lattice distances are fewer at the construction scale") {
    const DyadicMeasure lf = lattice_falconer(16, 2, 12);
    const LineMeasure d = pinned_distance(lf, {1.7, 1.3, 0}, 12);
    // Level 8 is a construction scale (multiple of 4); level 10 is not.
    const double at = std::log2(static_cast<double>(d.box_count_at(8))) / 8;
    const double off = std::log2(static_cast<double>(d.box_count_at(10))) / 10;
    MESSAGE("construction-scale ratio " << at << " vs " << off);
    CHECK(at <= off + 1e-12);
}

TEST_CASE("train track") {
    CHECK(train_track(8, 12, 0).is_trivial());
    const DyadicMeasure tt = train_track(8, 12);
    CHECK(tt.total_mass() == doctest::Approx(1.0));
    CHECK_THROWS_AS(train_track(7, 12), InvalidArgument);
    CHECK_THROWS_AS(train_track(8, 8), InvalidArgument);
    // One vertical position per track at the track scale.
    CHECK(box_count(tt, 4) == 16);
}

TEST_CASE("scene parsing") {
    const SceneConfig c = cantor_scene(16);
    CHECK(c.window_lo == 4);
    CHECK(c.window_hi == 14);
    CHECK(c.zeta == doctest::Approx(0.12));
    CHECK(c.pins.count == 32);
    const SceneConfig back = scene_from_json(scene_to_json(c));
    CHECK(scene_to_json(back) == scene_to_json(c));
    CHECK(scenes_from_json(json::array({scene_to_json(c), scene_to_json(c)})).size() == 2);
    CHECK(scenes_from_json(json{{"scenes", json::array({scene_to_json(c)})}}).size() == 1);

    CHECK_THROWS_AS(scene_from_json(json{{"scenario", "x"}}), ParseError);
    CHECK_THROWS_AS(scene_from_json(json::array()), ParseError);
    json bad = scene_to_json(c);
    bad["depth"] = 4;
    CHECK_THROWS_AS(scene_from_json(bad), InvalidArgument);
    bad = scene_to_json(c);
    bad["generator"]["kind"] = "nope";
    CHECK_THROWS_AS(build_scene_measure(scene_from_json(bad)), InvalidArgument);
}

TEST_CASE("errors carry the stage name") {
    json j = scene_to_json(cantor_scene(12));
    j["generator"] = {{"kind", "from_file"}, {"params", {{"path", "/nonexistent/mu.txt"}}}};
    try {
        run_experiment(scene_from_json(j));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).rfind("generate:", 0) == 0);
    }
}

TEST_CASE("point mass scene is degenerate") {
    const fs::path dir = scratch("point");
    fs::create_directories(dir);
    save_measure((dir / "pt.txt").string(), DyadicMeasure::from_leaves(2, 10, {{{300, 700, 0}, 1.0}}));
    json j = scene_to_json(cantor_scene(10));
    j["scenario"] = "point";
    j["generator"] = {{"kind", "from_file"}, {"params", {{"path", (dir / "pt.txt").string()}}}};
    const ExperimentResult r = run_experiment(scene_from_json(j));
    CHECK(r.degenerate);
    CHECK_FALSE(r.pass);
    CHECK(r.exponent == 0.0);
}

TEST_CASE("cantor scene at depth 12") {
    const ExperimentResult r = run_experiment(cantor_scene(12));
    CHECK_FALSE(r.degenerate);
    CHECK(r.pins.size() == 8);
    CHECK(r.frostman_t == doctest::Approx(1.0).epsilon(0.05));
    REQUIRE(r.target.has_value());
    CHECK(*r.target == doctest::Approx(phi(std::min(r.frostman_t, 1.0)) - 0.12));
    CHECK(r.exponent > 0.52);
    for (std::size_t i = 1; i < r.pins.size(); ++i) CHECK(r.pins[i].exponent <= r.pins[i - 1].exponent);
}

TEST_CASE("reports are deterministic and idempotent") {
    const fs::path a = scratch("rep_a"), b = scratch("rep_b");
    const std::vector<ExperimentResult> one{run_experiment(cantor_scene(10))};
    emit_report(one, a.string());
    emit_report({run_experiment(cantor_scene(10))}, b.string());
    CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
    CHECK(slurp(a / "cantor_pin0.dat") == slurp(b / "cantor_pin0.dat"));
    const std::string first = slurp(a / "summary.csv");
    emit_report(one, a.string());
    CHECK(slurp(a / "summary.csv") == first);

    std::istringstream rows(first);
    std::string line;
    int n = 0;
    while (std::getline(rows, line)) ++n;
    CHECK(n == 2);
    std::istringstream dat(slurp(a / "cantor_pin0.dat"));
    std::getline(dat, line);
    CHECK(line.rfind("#", 0) == 0);
    double x, y;
    int pts = 0;
    while (dat >> x >> y) ++pts;
    CHECK(pts == static_cast<int>(one[0].pins[0].levels.size()));

    const fs::path e = scratch("rep_empty");
    emit_report({}, e.string());
    CHECK(slurp(e / "summary.csv") == summary_header() + "\n");

    CHECK_THROWS_AS(emit_report(one, "/proc/dyadlab_cannot_write"), InvalidArgument);
}
