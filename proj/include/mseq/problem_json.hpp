#pragma once

#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "problem_model.hpp"
#include "report.hpp"

namespace mseq {

// Document layout:
//   {"spectrum": {"kind": "power"|"exponential", "p": .., "n_max": ..}
//              | {"kind": "explicit", "values": [..]},
//    "class":    {"kind": "power"|"exponential", "kappa": .., "Q": ..}
//              | {"kind": "explicit"|"from_source_set", "Q": .., "values": [..]},
//    "sigma": .., "N": ..}

namespace detail {

inline void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw InvalidInput(where + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw InvalidInput("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T required(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw InvalidInput(std::string("missing key '") + key + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InvalidInput(std::string("key '") + key + "' in " + where + " has the wrong type");
    }
}

inline std::size_t required_count(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw InvalidInput(std::string("missing key '") + key + "' in " + where);
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1)
        throw InvalidInput(std::string("key '") + key + "' in " + where + " must be a positive integer");
    return v.get<std::size_t>();
}

inline const char* spectrum_kind_name(SpectrumKind k) {
    switch (k) {
    case SpectrumKind::power: return "power";
    case SpectrumKind::exponential: return "exponential";
    default: return "explicit";
    }
}

inline const char* ellipsoid_kind_name(EllipsoidKind k) {
    switch (k) {
    case EllipsoidKind::power: return "power";
    case EllipsoidKind::exponential: return "exponential";
    case EllipsoidKind::from_source_set: return "from_source_set";
    default: return "explicit";
    }
}

} // namespace detail

/// Keys allowed at the top level of a problem document.
inline const std::set<std::string>& problem_keys() {
    static const std::set<std::string> keys{"spectrum", "class", "sigma", "N"};
    return keys;
}

/// Parses a problem document. `extra_keys` are tolerated at the top level
/// (command parameters in experiment configs); anything else is rejected.
inline SequenceProblem problem_from_json(const Json& doc, const std::set<std::string>& extra_keys = {}) {
    using detail::required;
    std::set<std::string> allowed = problem_keys();
    allowed.insert(extra_keys.begin(), extra_keys.end());
    detail::reject_unknown_keys(doc, allowed, "problem");

    const std::size_t n = detail::required_count(doc, "N", "problem");
    const double sigma = required<double>(doc, "sigma", "problem");

    SequenceProblem problem;
    problem.sigma = sigma;

    const Json spec = required<Json>(doc, "spectrum", "problem");
    const auto skind = required<std::string>(spec, "kind", "spectrum");
    if (skind == "power" || skind == "exponential") {
        detail::reject_unknown_keys(spec, {"kind", "p", "n_max"}, "spectrum");
        const double p = required<double>(spec, "p", "spectrum");
        if (spec.contains("n_max") && detail::required_count(spec, "n_max", "spectrum") != n)
            throw InvalidInput("spectrum n_max differs from N");
        problem.spectrum = skind == "power" ? make_power_spectrum(p, n) : make_exponential_spectrum(p, n);
    } else if (skind == "explicit") {
        detail::reject_unknown_keys(spec, {"kind", "values"}, "spectrum");
        problem.spectrum = SingularSpectrum::explicit_values(required<std::vector<double>>(spec, "values", "spectrum"));
    } else {
        throw InvalidInput("unknown spectrum kind '" + skind + "'");
    }

    const Json cls = required<Json>(doc, "class", "problem");
    const auto ckind = required<std::string>(cls, "kind", "class");
    if (ckind == "power" || ckind == "exponential") {
        detail::reject_unknown_keys(cls, {"kind", "kappa", "Q"}, "class");
        const double kappa = required<double>(cls, "kappa", "class");
        const double q = required<double>(cls, "Q", "class");
        problem.smoothness = ckind == "power" ? EllipsoidClass::power(kappa, q, n)
                                              : EllipsoidClass::exponential(kappa, q, n);
    } else if (ckind == "explicit") {
        detail::reject_unknown_keys(cls, {"kind", "Q", "values"}, "class");
        problem.smoothness = EllipsoidClass::explicit_values(required<std::vector<double>>(cls, "values", "class"),
                                                             required<double>(cls, "Q", "class"));
    } else if (ckind == "from_source_set") {
        detail::reject_unknown_keys(cls, {"kind", "Q", "values"}, "class");
        if (cls.contains("Q") && required<double>(cls, "Q", "class") != 1.0)
            throw InvalidInput("source-set classes have Q = 1");
        problem.smoothness = EllipsoidClass::from_source_set(required<std::vector<double>>(cls, "values", "class"));
    } else {
        throw InvalidInput("unknown class kind '" + ckind + "'");
    }

    if (problem.spectrum.size() != n || problem.smoothness.size() != n)
        throw InvalidInput("value lists must have length N = " + std::to_string(n));
    return problem;
}

inline Json problem_to_json(const SequenceProblem& problem) {
    const std::size_t n = problem.dimension();
    Json spec;
    spec["kind"] = detail::spectrum_kind_name(problem.spectrum.kind());
    if (problem.spectrum.kind() == SpectrumKind::explicit_values) {
        spec["values"] = json_array(problem.spectrum.values());
    } else {
        spec["p"] = problem.spectrum.parameter();
        spec["n_max"] = n;
    }

    Json cls;
    const auto ck = problem.smoothness.kind();
    cls["kind"] = detail::ellipsoid_kind_name(ck);
    if (ck == EllipsoidKind::power || ck == EllipsoidKind::exponential) {
        cls["kappa"] = problem.smoothness.parameter();
        cls["Q"] = problem.smoothness.radius();
    } else {
        cls["Q"] = problem.smoothness.radius();
        cls["values"] = json_array(problem.smoothness.weights());
    }

    Json doc;
    doc["spectrum"] = std::move(spec);
    doc["class"] = std::move(cls);
    doc["sigma"] = problem.sigma;
    doc["N"] = n;
    return doc;
}

} // namespace mseq
