#pragma once

#include <string>
#include <vector>

#include "dyadlab/pl_function.hpp"

namespace dyadlab {

// eta(s,t) for the planar profile. Either a constant, or a rectangular grid
// over (s,t) with bilinear interpolation. Always 0 for t <= s.
class EtaTable {
public:
    static EtaTable constant(double value);
    static EtaTable grid(std::vector<double> s_values, std::vector<double> t_values,
                         std::vector<std::vector<double>> eta);  // eta[i][k] at (s_i, t_k)

    double operator()(double s, double t) const;
    bool is_constant() const { return s_values_.empty(); }
    double constant_value() const { return value_; }
    const std::vector<double>& s_values() const { return s_values_; }
    const std::vector<double>& t_values() const { return t_values_; }
    const std::vector<std::vector<double>>& values() const { return eta_; }

private:
    double value_ = 0.0;
    std::vector<double> s_values_;
    std::vector<double> t_values_;
    std::vector<std::vector<double>> eta_;
};

enum class ProfileKind { HighDim, Planar, TrivialHalf, KaufmanIdentity, Custom };

// Nondecreasing D : [0,d] -> [0,k].
class Profile {
public:
    static Profile high_dim(int d, double s);
    static Profile planar(double s, EtaTable eta);
    static Profile trivial_half(int d = 2);
    static Profile kaufman_identity(int d, double s);
    static Profile custom(int d, PLFunction g);

    double operator()(double t) const;

    ProfileKind kind() const { return kind_; }
    int dim() const { return dim_; }
    double s() const { return s_; }
    double s_prime() const { return s_prime_; }
    const EtaTable& eta() const { return eta_; }
    const PLFunction& custom_function() const { return custom_; }
    std::string name() const;

private:
    ProfileKind kind_ = ProfileKind::TrivialHalf;
    int dim_ = 2;
    double s_ = 0.0;
    double s_prime_ = 0.0;
    EtaTable eta_;
    PLFunction custom_;
};

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

}  // namespace dyadlab
