#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyadlab/pl_function.hpp"
#include "dyadlab/profile.hpp"

namespace dyadlab {

// Positive root of x^2 + (2-u)x - u = 0.
double phi(double u);
double phi_residual(double u, double x);

// Exponent c_d for d >= 4: phi(1/2)/(d+1) for odd d, (phi(1)-1/2)/(d+1) for even d.
double c_d(int d);

struct Interval {
    double a = 0.0;
    double b = 0.0;
    double sigma = 0.0;
};

struct IntervalDecomposition {
    std::vector<Interval> entries;
    double tau = 0.0;
    std::optional<double> value;  // sum (b-a) D(sigma) when bound to a profile
};

// tau <= b - a <= a, with a relative tolerance of 1e-12 on both sides so
// that grid endpoints like k/n are classified consistently.
bool allowable(double a, double b, double tau);

// Minimum chord slope (f(x)-f(a))/(x-a) over breakpoints x in (a,b] and x = b.
double best_slope(const PLFunction& f, double a, double b);
bool is_superlinear(const PLFunction& f, double a, double b, double sigma, double tol = 1e-12);

// Empty string when the decomposition is valid; otherwise the first problem found.
// With f given, every entry must also be sigma-superlinear.
std::string check_decomposition(const IntervalDecomposition& dec, double d,
                                const PLFunction* f = nullptr);

Interval merge(const PLFunction& f, const Interval& left, const Interval& right);
std::vector<Interval> merge_increasing(const PLFunction& f, const std::vector<Interval>& chain);

struct SuperlinearResult {
    IntervalDecomposition dec;
    double tau = 0.0;
    double total = 0.0;   // sum (a_{j+1}-a_j) sigma_j
    double target = 0.0;  // f(b) - f(a) - eps (b - a)
    bool meets_target = false;
};

// Consecutive chain covering [a,b] with tau <= a_{j+1}-a_j <= rho <= a_j,
// maximizing the sigma-weighted length on a grid of step tau/2 plus the
// breakpoints of f.
SuperlinearResult superlinear_decomposition(const PLFunction& f, double a, double b,
                                            double eps, double rho, double d);

struct SigmaValue {
    double value = 0.0;
    IntervalDecomposition dec;
};

// Grid DP over endpoints i/grid_n.
SigmaValue sigma_for_f(const Profile& D, const PLFunction& f, double tau, int grid_n);
// Same DP over an arbitrary sorted endpoint set.
SigmaValue sigma_on_points(const Profile& D, const PLFunction& f, double tau,
                           const std::vector<double>& points);
// Default grid: smallest multiple of `segments` with step <= tau/8.
int default_grid(double tau, int segments);

struct SearchOptions {
    int segments = 16;
    int slope_levels = 8;     // slopes k*d/slope_levels
    int coarse_segments = 4;  // exhaustive seed pass
    std::size_t budget = 12000;
    std::size_t beam = 32;
    int grid_n = 0;           // 0 means default_grid
    bool general = false;     // allow negative slopes
};

struct SigmaTauResult {
    double estimate = 0.0;
    PLFunction certificate;
    std::vector<int> certificate_slopes;  // slope indices, slope = k*d/levels
    IntervalDecomposition certificate_dec;
    std::size_t evaluations = 0;
    bool exhaustive = false;
};

// Adversarial minimization of sigma_for_f over the class L_{d,t}. The
// returned estimate is an upper bound for the infimum, witnessed by the
// certificate. Extra seeds (arbitrary PL functions in the class) are evaluated
// first.
SigmaTauResult sigma_tau(const Profile& D, double t, double tau, const SearchOptions& opts,
                         const std::vector<PLFunction>& seeds = {});

struct ScanRow {
    double t = 0.0;
    double estimate = 0.0;
    double increment_bound = 0.0;  // allowed rise from the previous row
    bool within_bound = true;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    bool monotone = true;
    bool bounds_hold = true;
    double modulus = 0.0;  // max rise / dt
};

// Sup of |D'| estimated on a fine grid of [0,d].
double profile_lipschitz(const Profile& D);

ScanResult lipschitz_scan(const Profile& D, const std::vector<double>& ts, double tau,
                          const SearchOptions& opts);

struct PlanarRow {
    double s = 0.0;
    double tau = 0.0;
    double estimate = 0.0;
    double margin = 0.0;
    std::string certificate_id;
    bool base_case = false;
    bool ok = true;
};

struct PlanarReport {
    double u = 0.0;
    double zeta = 0.0;
    std::vector<PlanarRow> rows;
    bool pass = true;
};

// s runs over i (phi(u)-zeta)/n_s for i = 1..n_s. Passes when every margin
// (estimate - s) is positive and base-case rows (s <= u/3) have margin at
// least u/100 - base_slack.
PlanarReport verify_planar_bound(double u, double zeta, const EtaTable& eta, double tau,
                                 const SearchOptions& opts, int n_s, double base_slack = 0.005);

struct HighDimRow {
    double s = 0.0;
    double bound = 0.0;
    double estimate = 0.0;
    double margin = 0.0;  // estimate - (bound - slack)
    std::size_t evaluations = 0;
    std::string certificate_id;
};

struct HighDimReport {
    int d = 3;
    double t = 0.0;
    std::vector<HighDimRow> rows;
    bool pass = true;
};

// For each s, searches L_{d,d/2} against the high-dimensional profile and
// checks estimate >= (s+1)/(d+1) - slack.
HighDimReport verify_highdim_bound(int d, const std::vector<double>& s_values, double tau,
                                   const SearchOptions& opts, double slack = 0.01);

std::string certificate_id(const std::vector<int>& slopes);

}  // namespace dyadlab
