#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dyadlab {

// Piecewise-linear function given by breakpoints x_0 < ... < x_n and values.
// Usually lives on [0,1]; profiles on [0,d] reuse it with a wider domain.
class PLFunction {
public:
    PLFunction() = default;
    PLFunction(std::vector<double> xs, std::vector<double> ys);

    // f(0) = 0 and equal-width segments on [0,1] with the given slopes.
    static PLFunction from_slopes(std::span<const double> slopes);
    static PLFunction linear(double slope);

    double operator()(double x) const;
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }
    std::size_t segments() const { return xs_.size() - 1; }
    double slope(std::size_t seg) const;
    double lo() const { return xs_.front(); }
    double hi() const { return xs_.back(); }

    double max_abs_slope() const;
    bool nondecreasing() const;

    // Same breakpoints, slopes shifted by `delta` wherever the slope is below
    // `threshold`, anchored at f(lo).
    PLFunction with_raised_slopes(double threshold, double delta) const;
    PLFunction capped(double level) const;  // min(f, level), exact breakpoints

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
};

struct ClassCheck {
    bool ok = true;
    std::string reason;
    std::optional<double> witness;
};

// f is d-Lipschitz with f(x) >= u x on [0,1]. Checking breakpoints suffices.
ClassCheck check_class(const PLFunction& f, double d, double u, double tol = 1e-12);

}  // namespace dyadlab
