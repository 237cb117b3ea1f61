#include "dyadlab/json_io.hpp"

#include "dyadlab/errors.hpp"

namespace dyadlab {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace

PLFunction pl_from_json(const json& j) {
    if (j.is_object() && j.contains("slopes")) {
        const auto s = field<std::vector<double>>(j, "slopes");
        return PLFunction::from_slopes(s);
    }
    return PLFunction(field<std::vector<double>>(j, "xs"), field<std::vector<double>>(j, "ys"));
}

json pl_to_json(const PLFunction& f) { return {{"xs", f.xs()}, {"ys", f.ys()}}; }

EtaTable eta_from_json(const json& j) {
    if (j.is_number()) return EtaTable::constant(j.get<double>());
    return EtaTable::grid(field<std::vector<double>>(j, "s"), field<std::vector<double>>(j, "t"),
                          field<std::vector<std::vector<double>>>(j, "eta"));
}

json eta_to_json(const EtaTable& e) {
    if (e.is_constant()) return e.constant_value();
    return {{"s", e.s_values()}, {"t", e.t_values()}, {"eta", e.values()}};
}

Profile profile_from_json(const json& j) {
    const auto kind = profile_kind_from_string(field<std::string>(j, "kind"));
    switch (kind) {
        case ProfileKind::HighDim:
            return Profile::high_dim(field<int>(j, "d"), field<double>(j, "s"));
        case ProfileKind::Planar:
            return Profile::planar(field<double>(j, "s"),
                                   j.contains("eta") ? eta_from_json(j.at("eta")) : EtaTable::constant(0.01));
        case ProfileKind::TrivialHalf:
            return Profile::trivial_half(j.value("d", 2));
        case ProfileKind::KaufmanIdentity:
            return Profile::kaufman_identity(field<int>(j, "d"), field<double>(j, "s"));
        case ProfileKind::Custom:
            if (!j.contains("g")) throw ParseError("custom profile needs 'g'");
            return Profile::custom(field<int>(j, "d"), pl_from_json(j.at("g")));
    }
    throw ParseError("unknown profile kind");
}

json profile_to_json(const Profile& p) {
    json j{{"kind", to_string(p.kind())}, {"d", p.dim()}};
    switch (p.kind()) {
        case ProfileKind::HighDim:
        case ProfileKind::KaufmanIdentity:
            j["s"] = p.s();
            break;
        case ProfileKind::Planar:
            j["s"] = p.s();
            j["s_prime"] = p.s_prime();
            j["eta"] = eta_to_json(p.eta());
            break;
        case ProfileKind::Custom:
            j["g"] = pl_to_json(p.custom_function());
            break;
        case ProfileKind::TrivialHalf:
            break;
    }
    return j;
}

json decomposition_to_json(const IntervalDecomposition& dec) {
    json entries = json::array();
    for (const Interval& iv : dec.entries) entries.push_back({{"a", iv.a}, {"b", iv.b}, {"sigma", iv.sigma}});
    json j{{"tau", dec.tau}, {"entries", entries}};
    if (dec.value) j["value"] = *dec.value;
    return j;
}

IntervalDecomposition decomposition_from_json(const json& j) {
    IntervalDecomposition dec;
    dec.tau = field<double>(j, "tau");
    if (!j.contains("entries") || !j.at("entries").is_array()) throw ParseError("missing 'entries' array");
    for (const json& e : j.at("entries")) {
        dec.entries.push_back({field<double>(e, "a"), field<double>(e, "b"), e.value("sigma", 0.0)});
    }
    if (j.contains("value")) dec.value = field<double>(j, "value");
    return dec;
}

}  // namespace dyadlab
