#include "dyadlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dyadlab/errors.hpp"

namespace dyadlab {

EtaTable EtaTable::constant(double value) {
    if (!(value >= 0.0)) throw InvalidArgument("eta must be nonnegative");
    EtaTable e;
    e.value_ = value;
    return e;
}

EtaTable EtaTable::grid(std::vector<double> s_values, std::vector<double> t_values,
                        std::vector<std::vector<double>> eta) {
    if (s_values.empty() || t_values.empty() || eta.size() != s_values.size()) {
        throw InvalidArgument("eta grid shape mismatch");
    }
    for (const auto& row : eta) {
        if (row.size() != t_values.size()) throw InvalidArgument("eta grid shape mismatch");
        for (double v : row) {
            if (!(v >= 0.0)) throw InvalidArgument("eta must be nonnegative");
        }
    }
    if (!std::is_sorted(s_values.begin(), s_values.end()) ||
        !std::is_sorted(t_values.begin(), t_values.end())) {
        throw InvalidArgument("eta grid axes must be sorted");
    }
    EtaTable e;
    e.s_values_ = std::move(s_values);
    e.t_values_ = std::move(t_values);
    e.eta_ = std::move(eta);
    return e;
}

namespace {

// Index k and weight w with x = (1-w) v[k] + w v[k+1].
std::pair<std::size_t, double> locate(const std::vector<double>& v, double x) {
    if (v.size() == 1) return {0, 0.0};
    auto it = std::upper_bound(v.begin(), v.end(), x);
    std::size_t k = it == v.begin() ? 0 : static_cast<std::size_t>(it - v.begin()) - 1;
    k = std::min(k, v.size() - 2);
    const double w = (x - v[k]) / (v[k + 1] - v[k]);
    return {k, std::clamp(w, 0.0, 1.0)};
}

}  // namespace

double EtaTable::operator()(double s, double t) const {
    if (t <= s) return 0.0;
    if (is_constant()) return value_;
    const double eps = 1e-12;
    if (s < s_values_.front() - eps || s > s_values_.back() + eps ||
        t < t_values_.front() - eps || t > t_values_.back() + eps) {
        std::ostringstream msg;
        msg << "eta table gap at (s,t) = (" << s << "," << t << ")";
        throw InvalidArgument(msg.str());
    }
    const auto [i, ws] = locate(s_values_, s);
    const auto [k, wt] = locate(t_values_, t);
    auto at = [&](std::size_t a, std::size_t b) {
        return eta_[std::min(a, eta_.size() - 1)][std::min(b, eta_[0].size() - 1)];
    };
    const double lo = (1 - wt) * at(i, k) + wt * at(i, k + 1);
    const double hi = (1 - wt) * at(i + 1, k) + wt * at(i + 1, k + 1);
    return (1 - ws) * lo + ws * hi;
}

Profile Profile::high_dim(int d, double s) {
    if (d < 2) throw InvalidArgument("high-dimensional profile needs d >= 2");
    Profile p;
    p.kind_ = ProfileKind::HighDim;
    p.dim_ = d;
    p.s_ = s;
    return p;
}

Profile Profile::planar(double s, EtaTable eta) {
    if (!(s > 0.0 && s < 2.0)) throw InvalidArgument("planar profile needs s in (0,2)");
    Profile p;
    p.kind_ = ProfileKind::Planar;
    p.dim_ = 2;
    p.s_ = s;
    p.eta_ = std::move(eta);
    // s' solves s + eta(s, s') = s'/2; the left side minus the right decreases in t.
    auto g = [&](double t) { return s + p.eta_(s, t) - 0.5 * t; };
    if (g(2.0) >= 0.0) {
        p.s_prime_ = 2.0;
    } else {
        double lo = s, hi = 2.0;
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            (mid > s && g(mid) >= 0.0 ? lo : hi) = mid;
        }
        p.s_prime_ = 0.5 * (lo + hi);
    }
    return p;
}

Profile Profile::trivial_half(int d) {
    Profile p;
    p.kind_ = ProfileKind::TrivialHalf;
    p.dim_ = d;
    return p;
}

Profile Profile::kaufman_identity(int d, double s) {
    Profile p;
    p.kind_ = ProfileKind::KaufmanIdentity;
    p.dim_ = d;
    p.s_ = s;
    return p;
}

Profile Profile::custom(int d, PLFunction g) {
    if (g.lo() != 0.0 || g.hi() != static_cast<double>(d)) {
        throw InvalidArgument("custom profile must be defined on [0,d]");
    }
    if (!g.nondecreasing()) throw InvalidArgument("custom profile must be nondecreasing");
    Profile p;
    p.kind_ = ProfileKind::Custom;
    p.dim_ = d;
    p.custom_ = std::move(g);
    return p;
}

double Profile::operator()(double t) const {
    switch (kind_) {
        case ProfileKind::HighDim:
            return std::max(std::min(1.0, s_ + t - (dim_ - 1)), t / dim_);
        case ProfileKind::Planar:
            if (t <= s_) return t;
            if (t <= s_prime_) return s_ + eta_(s_, t);
            return 0.5 * t;
        case ProfileKind::TrivialHalf:
            return 0.5 * t;
        case ProfileKind::KaufmanIdentity:
            return std::min(t, s_);
        case ProfileKind::Custom:
            return custom_(t);
    }
    return 0.0;
}

std::string Profile::name() const {
    std::ostringstream os;
    os << to_string(kind_);
    switch (kind_) {
        case ProfileKind::HighDim:
        case ProfileKind::KaufmanIdentity:
            os << "(d=" << dim_ << ",s=" << s_ << ")";
            break;
        case ProfileKind::Planar:
            os << "(s=" << s_ << ",s'=" << s_prime_ << ")";
            break;
        default:
            os << "(d=" << dim_ << ")";
    }
    return os.str();
}

std::string to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::HighDim: return "high_dim";
        case ProfileKind::Planar: return "planar";
        case ProfileKind::TrivialHalf: return "trivial_half";
        case ProfileKind::KaufmanIdentity: return "kaufman_identity";
        case ProfileKind::Custom: return "custom";
    }
    return "?";
}

ProfileKind profile_kind_from_string(const std::string& name) {
    if (name == "high_dim") return ProfileKind::HighDim;
    if (name == "planar") return ProfileKind::Planar;
    if (name == "trivial_half") return ProfileKind::TrivialHalf;
    if (name == "kaufman_identity") return ProfileKind::KaufmanIdentity;
    if (name == "custom") return ProfileKind::Custom;
    throw InvalidArgument("unknown profile kind '" + name + "'");
}

}  // namespace dyadlab
