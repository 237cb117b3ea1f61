#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dyadlab/analysis.hpp"
#include "dyadlab/measure.hpp"

namespace dyadlab {

// Measure on S^{d-1}, d = 2 or 3. For d = 2 the cells are n equal arcs; for
// d = 3 they are the Voronoi cells of an n-point Fibonacci spiral lattice.
class DirectionMeasure {
public:
    DirectionMeasure() = default;
    DirectionMeasure(int dim, int cells);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(masses_.size()); }
    double resolution() const;  // nominal angular width of a cell
    Point direction(int cell) const;
    int locate(const Point& v) const;  // v need not be normalized

    double mass(int cell) const { return masses_[cell]; }
    const std::vector<double>& masses() const { return masses_; }
    void add(int cell, double mass) { masses_[cell] += mass; }
    void set(int cell, double mass) { masses_[cell] = mass; }
    double total_mass() const;
    DirectionMeasure normalized() const;

    // d = 2: cell angle in [0, 2pi).
    double angle(int cell) const;

private:
    void build_index();

    int dim_ = 2;
    std::vector<double> masses_;
    std::vector<Point> dirs_;
    // d = 3 nearest-point lookup: uniform buckets over [-1,1]^3.
    int buckets_ = 0;
    std::unordered_map<long, std::vector<int>> index_;
};

// Uniform measure on an arc of S^1 (angles in radians, lo < hi).
DirectionMeasure uniform_arc(int cells, double lo, double hi);

// Pushforward on a line, stored as a d = 1 dyadic measure over [lo, lo + 2^K).
// `lo` is a multiple of 2^(K-1) and K >= 1, so level n + K of the stored
// measure is the absolute dyadic grid of step 2^-n for every n >= 0.
struct LineMeasure {
    DyadicMeasure measure;
    double lo = 0.0;
    int K = 0;
    int out_depth = 0;  // absolute resolution 2^-out_depth

    double hi() const { return lo + std::ldexp(1.0, K); }
    int level_for(int n) const { return n + K; }
    double entropy_at(int n) const;     // normalized entropy at absolute level n
    std::size_t box_count_at(int n) const;
    std::vector<double> masses_at(int n) const;  // normalized
};

// Builds a LineMeasure from weighted values; `force_lo_zero` pins the range at 0.
LineMeasure line_measure_from_values(const std::vector<std::pair<double, double>>& values,
                                     int out_depth, bool force_lo_zero = false);

LineMeasure project_linear(const DyadicMeasure& mu, const Point& theta, int out_depth);
DirectionMeasure project_radial(const DyadicMeasure& mu, const Point& y, int cells);
LineMeasure pinned_distance(const DyadicMeasure& mu, const Point& y, int out_depth);

// Distance from y to the nearest leaf center.
double pin_separation(const DyadicMeasure& mu, const Point& y);

struct TubeMax {
    double mass = 0.0;
    Point direction{};
};

// Heaviest closed r-slab through x. step = 0 uses an exact angular sweep
// (d = 2); step > 0 samples directions on a grid of that angular step.
TubeMax tube_mass_max(const DyadicMeasure& nu, const Point& x, double r, double step = 0.0);

struct ThinTubeProfile {
    Point pin{};
    double t = 0.0;
    double K = 1.0;
    double c = 1.0;
    std::vector<double> r;
    std::vector<double> worst;  // normalized worst-tube mass per r
};

struct ThinTubeOptions {
    int pins = 32;
    int remove_top = 0;  // worst tubes deleted from nu before fitting
};

// r_levels are exponents k with r = 2^-k.
std::vector<ThinTubeProfile> thin_tubes_profile(const DyadicMeasure& mu, const DyadicMeasure& nu,
                                                const std::vector<int>& r_levels,
                                                const ThinTubeOptions& opts = {});

// Deterministic pin panel: leaf centers at mass quantiles (i + 1/2)/count.
std::vector<Point> pin_panel(const DyadicMeasure& mu, int count);

// Largest rho-mass of the a-neighbourhood of a hyperplane through the origin.
double hyperplane_concentration(const DirectionMeasure& rho, double a);

struct AuditResult {
    double failing_fraction = 0.0;
    int cells_audited = 0;
    int cells_failing = 0;
    double frostman_s = 0.0;  // fitted exponent of mu over the audited levels
    std::vector<int> failing;
};

// Robustness of each projection at level delta_level, weighted by rho.
AuditResult adapted_audit(const DirectionMeasure& rho, const DyadicMeasure& mu, int delta_level,
                          double s, double eps);

struct ProjectionBound {
    double bad_mass = 0.0;
    double concentration = 0.0;
    double threshold = 0.0;  // H_m(mu)/d - log2(1/a) - C
    bool precondition = false;
    bool bound_holds = false;
};

// Mass of directions whose projection has entropy below the threshold.
// Throws HypothesisViolated when hyperplane_concentration(rho, a) > b unless
// allow_unverified is set.
ProjectionBound entropy_projection_bound(const DirectionMeasure& rho, const DyadicMeasure& mu, int m,
                                         double a, double b, double fitted_constant,
                                         bool allow_unverified = false);

}  // namespace dyadlab
