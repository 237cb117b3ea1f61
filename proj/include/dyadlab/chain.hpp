#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dyadlab/measure.hpp"
#include "dyadlab/sigma.hpp"

namespace dyadlab {

struct ScaleSchedule {
    int M = 0;
    std::vector<std::pair<int, int>> intervals;  // (A_j, B_j)

    int J() const { return static_cast<int>(intervals.size()); }
};

// Empty string when 0 <= A_j < B_j <= M, B_j <= 2 A_j, and the intervals are
// disjoint and increasing.
std::string validate_schedule(const ScaleSchedule& s);

struct ScheduleBridge {
    ScaleSchedule schedule;
    double max_drift = 0.0;  // largest |m a - round(m a)| over endpoints
};

// A_j = round(m a_j), B_j = round(m b_j). Throws InvalidArgument if the result
// is not a valid schedule.
ScheduleBridge schedule_from_decomposition(const IntervalDecomposition& dec, int m);

enum class MapKind { PinnedDistance, Radial2d };

std::string to_string(MapKind kind);
MapKind map_kind_from_string(const std::string& name);

// PinnedDistance: (y-x)/|y-x|. Radial2d: its rotation by pi/2.
Point linearization_direction(MapKind kind, const Point& x, const Point& y, int dim);

// Optional user direction field x -> V(x); overrides the built-in kinds.
using DirectionField = std::function<Point(const Point&)>;

struct ChainSides {
    double lhs = 0.0;  // H_M(F mu), bits
    double rhs = 0.0;  // integral of sum_j H_{B_j-A_j}(P_V(x) mu^{D_A_j(x)})
    int J = 0;
    double slack() const { return lhs - rhs; }
};

// The integral is an exact leaf-weighted sum up to depth 14; deeper measures
// use 4096 mass quantile leaves.
ChainSides chain_sides(const DyadicMeasure& mu, MapKind kind, const Point& y,
                       const ScaleSchedule& schedule, const DirectionField& field = {});

struct RobustChainSides {
    double lhs = 0.0;        // H_M(F mu')
    double rhs = 0.0;        // robust entropies H^{M Theta}, integrated against mu'
    double rhs_plain = 0.0;  // plain entropies, integrated against mu'
    int J = 0;
};

// Requires mu' <= Theta mu leafwise (both normalized).
RobustChainSides chain_sides_robust(const DyadicMeasure& mu, const DyadicMeasure& mu_prime,
                                    MapKind kind, const Point& y, const ScaleSchedule& schedule,
                                    double theta, const DirectionField& field = {});

struct ChainInstance {
    std::string id;
    MapKind kind = MapKind::PinnedDistance;
    int m = 0;
    ChainSides sides;
};

// max over instances of (rhs - lhs)/J, clamped at 0. Instances with J = 0 are skipped.
double fit_chain_constant(const std::vector<ChainInstance>& panel);

struct PanelOptions {
    int count = 20;
    int depth = 12;
    std::uint64_t seed = 1;
};

struct PanelEntry {
    ChainInstance instance;
    RobustChainSides robust;  // mu' = mu restricted to its heaviest half
    double theta = 1.0;
};

// Random self-similar planar measures with 3 to 5 base-4 digits, pins at
// distance >= 1/4 outside the unit square, and random consecutive allowable
// schedules on the grid of step 1/depth.
std::vector<PanelEntry> random_chain_panel(const PanelOptions& opts);

// instance_id,kind,m,J,lhs,rhs,slack,slack_per_J
void write_chain_panel(std::ostream& os, const std::vector<ChainInstance>& panel);

}  // namespace dyadlab
