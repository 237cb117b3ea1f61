#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dyadlab/measure.hpp"

namespace dyadlab {

struct GeneratorSpec {
    std::string kind;  // cantor_product | lattice_falconer | train_track | circle_pair | product_set | from_file
    nlohmann::json params = nlohmann::json::object();
};

struct PinPolicy {
    int count = 32;                  // size of the deterministic panel
    std::string selection = "top8";  // top<k> by thin-tube exponent, or "all"
};

struct SceneConfig {
    std::string scenario;
    GeneratorSpec generator;
    int depth = 16;
    PinPolicy pins;
    int window_lo = -1;  // default: 2 + 2
    int window_hi = -1;  // default: depth - 2
    double zeta = 0.12;
    std::optional<int> single_scale_level;  // defaults to the train track level
    std::string output;
};

// Throws ParseError on malformed input and InvalidArgument on bad values.
SceneConfig scene_from_json(const nlohmann::json& j);
std::vector<SceneConfig> scenes_from_json(const nlohmann::json& j);  // object or array
nlohmann::json scene_to_json(const SceneConfig& c);

DyadicMeasure build_scene_measure(const SceneConfig& c);
int scene_dim(const SceneConfig& c);

struct PinResult {
    Point pin{};
    double tube_t = 0.0;
    double exponent = 0.0;                 // least squares slope of log2 N_n
    std::vector<int> levels;
    std::vector<double> log2_counts;
    double single_scale = 0.0;             // log2 N_n / n at the single-scale level
};

struct ExperimentResult {
    std::string scenario;
    std::string generator;
    int dim = 2;
    int depth = 0;
    double frostman_t = 0.0;
    int split_axis = 0;
    double split_cut = 0.0;
    double zeta = 0.0;
    std::optional<double> target;
    std::string target_source;
    std::vector<PinResult> pins;  // selected pins, best first
    double exponent = 0.0;        // best selected pin
    int single_scale_level = 0;
    double single_scale = 0.0;    // best selected pin
    bool degenerate = false;
    bool pass = false;
    std::string note;
};

// Errors are rethrown as Error with the failing stage in the message.
ExperimentResult run_experiment(const SceneConfig& c);

// Writes <dir>/summary.csv and <dir>/<scenario>_pin<k>.dat (level, log2 count).
void emit_report(const std::vector<ExperimentResult>& results, const std::string& dir);

std::string summary_header();
std::string summary_row(const ExperimentResult& r);

}  // namespace dyadlab
