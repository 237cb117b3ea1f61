#include "dyadlab/pl_function.hpp"

#include <algorithm>
#include <cmath>

#include "dyadlab/errors.hpp"

namespace dyadlab {

PLFunction::PLFunction(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() < 2 || xs_.size() != ys_.size()) {
        throw InvalidArgument("PL function needs matching breakpoints and values, at least 2");
    }
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        if (!(xs_[i] > xs_[i - 1])) throw InvalidArgument("breakpoints must increase strictly");
    }
    for (double y : ys_) {
        if (!std::isfinite(y)) throw InvalidArgument("PL function values must be finite");
    }
}

PLFunction PLFunction::from_slopes(std::span<const double> slopes) {
    if (slopes.empty()) throw InvalidArgument("need at least one slope");
    const std::size_t n = slopes.size();
    std::vector<double> xs(n + 1), ys(n + 1);
    xs[0] = 0.0;
    ys[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        xs[i] = static_cast<double>(i) / static_cast<double>(n);
        ys[i] = ys[i - 1] + slopes[i - 1] / static_cast<double>(n);
    }
    xs[n] = 1.0;
    return PLFunction(std::move(xs), std::move(ys));
}

PLFunction PLFunction::linear(double slope) { return PLFunction({0.0, 1.0}, {0.0, slope}); }

double PLFunction::operator()(double x) const {
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - xs_.begin());
    const double x0 = xs_[k - 1], x1 = xs_[k];
    if (x == x0) return ys_[k - 1];
    const double w = (x - x0) / (x1 - x0);
    return ys_[k - 1] + w * (ys_[k] - ys_[k - 1]);
}

double PLFunction::slope(std::size_t seg) const {
    return (ys_[seg + 1] - ys_[seg]) / (xs_[seg + 1] - xs_[seg]);
}

double PLFunction::max_abs_slope() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i) m = std::max(m, std::abs(slope(i)));
    return m;
}

bool PLFunction::nondecreasing() const {
    for (std::size_t i = 1; i < ys_.size(); ++i) {
        if (ys_[i] < ys_[i - 1]) return false;
    }
    return true;
}

PLFunction PLFunction::with_raised_slopes(double threshold, double delta) const {
    std::vector<double> ys(ys_.size());
    ys[0] = ys_[0];
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
        double sl = slope(i);
        if (sl < threshold) sl += delta;
        ys[i + 1] = ys[i] + sl * (xs_[i + 1] - xs_[i]);
    }
    return PLFunction(xs_, std::move(ys));
}

PLFunction PLFunction::capped(double level) const {
    std::vector<double> xs, ys;
    auto push = [&](double x, double y) {
        if (!xs.empty() && x <= xs.back()) return;
        xs.push_back(x);
        ys.push_back(y);
    };
    push(xs_[0], std::min(ys_[0], level));
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        const double y0 = ys_[i - 1], y1 = ys_[i];
        if ((y0 - level) * (y1 - level) < 0.0) {
            const double x = xs_[i - 1] + (level - y0) / (y1 - y0) * (xs_[i] - xs_[i - 1]);
            push(x, level);
        }
        push(xs_[i], std::min(y1, level));
    }
    return PLFunction(std::move(xs), std::move(ys));
}

ClassCheck check_class(const PLFunction& f, double d, double u, double tol) {
    ClassCheck out;
    if (f.lo() != 0.0 || f.hi() != 1.0) {
        out.ok = false;
        out.reason = "domain is not [0,1]";
        return out;
    }
    for (std::size_t i = 0; i < f.segments(); ++i) {
        if (std::abs(f.slope(i)) > d + tol) {
            out.ok = false;
            out.reason = "slope exceeds Lipschitz constant";
            out.witness = f.xs()[i];
            return out;
        }
    }
    for (std::size_t i = 0; i < f.xs().size(); ++i) {
        const double x = f.xs()[i];
        if (f.ys()[i] < u * x - tol) {
            out.ok = false;
            out.reason = "falls below the line u*x";
            out.witness = x;
            return out;
        }
        if (f.ys()[i] < -tol || f.ys()[i] > d + tol) {
            out.ok = false;
            out.reason = "value outside [0,d]";
            out.witness = x;
            return out;
        }
    }
    return out;
}

}  // namespace dyadlab
