#pragma once

// Result serialization. A report carries everything downstream tooling
// needs to re-check or plot a solution: the optimal operator, the value,
// the measurement, the per-state classification and the certificate
// residuals. Two renderings of the same structure: a flat key-value text
// document and JSON (--json). Both are versioned through a schema field and
// print numbers with 12 significant digits so reports round-trip across
// implementations. Identical inputs produce byte-identical reports except
// for the wall_time_ms line.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "analytic.hpp"
#include "bloch.hpp"
#include "errors.hpp"
#include "povm.hpp"
#include "vec3.hpp"

namespace qsd {

inline constexpr const char* kReportSchema = "qsd-report/1";

struct CrossCheck {
    double numeric_p_guess = 0.0;
    double difference = 0.0;
};

struct Report {
    std::string method;  // analytic, numeric or both
    SolveCase kind = SolveCase::Trivial;
    double p_guess = 0.0;
    Vec3 s{};
    std::vector<std::string> active;
    Povm povm;
    std::vector<std::pair<std::string, StateClass>> classes;  // ensemble order
    CertificateReport certificate;
    int iterations = 0;
    double wall_time_ms = 0.0;
    std::optional<CrossCheck> cross_check;
};

namespace detail {

// 12 significant digits; the canonical numeric form in both renderings.
inline std::string fmt12(double v) {
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Doubles destined for JSON are rounded to the printed precision first so
// the JSON rendering never leaks extra digits.
inline double round12(double v) { return std::strtod(fmt12(v).c_str(), nullptr); }

inline nlohmann::ordered_json vec_json(const Vec3& v) {
    return {round12(v.x), round12(v.y), round12(v.z)};
}

inline std::string vec_text(const Vec3& v) {
    return "[" + fmt12(v.x) + ", " + fmt12(v.y) + ", " + fmt12(v.z) + "]";
}

inline StateClass state_class_from_string(const std::string& s) {
    if (s == "trivial-guess") return StateClass::TrivialGuess;
    if (s == "guessable") return StateClass::Guessable;
    if (s == "nearly-guessable") return StateClass::NearlyGuessable;
    if (s == "unguessable") return StateClass::Unguessable;
    throw ValidationError("unknown state class: " + s);
}

inline SolveCase solve_case_from_string(const std::string& s) {
    if (s == "trivial") return SolveCase::Trivial;
    if (s == "pair") return SolveCase::Pair;
    if (s == "triplet") return SolveCase::Triplet;
    if (s == "quadruple") return SolveCase::Quadruple;
    if (s == "numeric") return SolveCase::Numeric;
    throw ValidationError("unknown case tag: " + s);
}

}  // namespace detail

inline Report build_report(const Ensemble& ens, const LagrangeResult& lag, const Povm& povm,
                           const CertificateReport& cert, const std::string& method,
                           double wall_time_ms) {
    Report rep;
    rep.method = method;
    rep.kind = lag.kind;
    rep.p_guess = lag.t;
    rep.s = lag.s;
    rep.active = active_labels(lag, ens);
    rep.povm = povm;
    const auto classes = classify(lag, ens);
    for (std::size_t x = 0; x < ens.size(); ++x) {
        rep.classes.emplace_back(ens.label(x), classes[x]);
    }
    rep.certificate = cert;
    rep.iterations = lag.iterations;
    rep.wall_time_ms = wall_time_ms;
    return rep;
}

inline nlohmann::ordered_json to_json(const Report& rep) {
    using detail::round12;
    nlohmann::ordered_json j;
    j["schema"] = kReportSchema;
    j["method"] = rep.method;
    j["case"] = to_string(rep.kind);
    j["p_guess"] = round12(rep.p_guess);
    j["sigma"] = {{"t", round12(rep.p_guess)}, {"s", detail::vec_json(rep.s)}};
    j["active"] = rep.active;
    nlohmann::ordered_json jp = nlohmann::ordered_json::array();
    for (const auto& el : rep.povm) {
        jp.push_back({{"label", el.label},
                      {"weight", round12(el.weight)},
                      {"direction", detail::vec_json(el.direction)}});
    }
    j["povm"] = jp;
    nlohmann::ordered_json jc = nlohmann::ordered_json::object();
    for (const auto& [label, cls] : rep.classes) jc[label] = to_string(cls);
    j["classes"] = jc;
    j["certificate"] = {{"feasibility", round12(rep.certificate.feasibility)},
                        {"completeness_weight", round12(rep.certificate.completeness_weight)},
                        {"completeness_vector", round12(rep.certificate.completeness_vector)},
                        {"slackness", round12(rep.certificate.slackness)},
                        {"gap", round12(rep.certificate.gap)},
                        {"tolerance", round12(rep.certificate.tolerance)},
                        {"pass", rep.certificate.pass}};
    if (rep.cross_check) {
        j["cross_check"] = {{"numeric_p_guess", round12(rep.cross_check->numeric_p_guess)},
                            {"difference", round12(rep.cross_check->difference)}};
    }
    j["iterations"] = rep.iterations;
    j["wall_time_ms"] = round12(rep.wall_time_ms);
    return j;
}

inline std::string to_text(const Report& rep) {
    using detail::fmt12;
    std::ostringstream out;
    out << "schema: " << kReportSchema << "\n";
    out << "method: " << rep.method << "\n";
    out << "case: " << to_string(rep.kind) << "\n";
    out << "p_guess: " << fmt12(rep.p_guess) << "\n";
    out << "sigma.t: " << fmt12(rep.p_guess) << "\n";
    out << "sigma.s: " << detail::vec_text(rep.s) << "\n";
    out << "active: [";
    for (std::size_t i = 0; i < rep.active.size(); ++i) {
        out << (i ? ", " : "") << rep.active[i];
    }
    out << "]\n";
    for (std::size_t i = 0; i < rep.povm.size(); ++i) {
        const auto& el = rep.povm[i];
        out << "povm[" << i << "]: label=" << el.label << " weight=" << fmt12(el.weight)
            << " direction=" << detail::vec_text(el.direction) << "\n";
    }
    for (const auto& [label, cls] : rep.classes) {
        out << "class." << label << ": " << to_string(cls) << "\n";
    }
    out << "certificate.feasibility: " << fmt12(rep.certificate.feasibility) << "\n";
    out << "certificate.completeness_weight: " << fmt12(rep.certificate.completeness_weight)
        << "\n";
    out << "certificate.completeness_vector: " << fmt12(rep.certificate.completeness_vector)
        << "\n";
    out << "certificate.slackness: " << fmt12(rep.certificate.slackness) << "\n";
    out << "certificate.gap: " << fmt12(rep.certificate.gap) << "\n";
    out << "certificate.tolerance: " << fmt12(rep.certificate.tolerance) << "\n";
    out << "certificate.pass: " << (rep.certificate.pass ? "true" : "false") << "\n";
    if (rep.cross_check) {
        out << "cross_check.numeric_p_guess: " << fmt12(rep.cross_check->numeric_p_guess)
            << "\n";
        out << "cross_check.difference: " << fmt12(rep.cross_check->difference) << "\n";
    }
    out << "iterations: " << rep.iterations << "\n";
    out << "wall_time_ms: " << fmt12(rep.wall_time_ms) << "\n";
    return out.str();
}

// Inverse of to_json, used to round-trip reports.
inline Report report_from_json(const nlohmann::ordered_json& j) {
    if (!j.contains("schema") || j["schema"] != kReportSchema) {
        throw ValidationError("report schema must be \"qsd-report/1\"");
    }
    Report rep;
    rep.method = j.at("method").get<std::string>();
    rep.kind = detail::solve_case_from_string(j.at("case").get<std::string>());
    rep.p_guess = j.at("p_guess").get<double>();
    const auto& js = j.at("sigma").at("s");
    rep.s = {js.at(0).get<double>(), js.at(1).get<double>(), js.at(2).get<double>()};
    for (const auto& a : j.at("active")) rep.active.push_back(a.get<std::string>());
    for (const auto& el : j.at("povm")) {
        const auto& d = el.at("direction");
        rep.povm.push_back({el.at("label").get<std::string>(), el.at("weight").get<double>(),
                            {d.at(0).get<double>(), d.at(1).get<double>(),
                             d.at(2).get<double>()}});
    }
    for (const auto& [label, cls] : j.at("classes").items()) {
        rep.classes.emplace_back(label, detail::state_class_from_string(cls.get<std::string>()));
    }
    const auto& c = j.at("certificate");
    rep.certificate.feasibility = c.at("feasibility").get<double>();
    rep.certificate.completeness_weight = c.at("completeness_weight").get<double>();
    rep.certificate.completeness_vector = c.at("completeness_vector").get<double>();
    rep.certificate.slackness = c.at("slackness").get<double>();
    rep.certificate.gap = c.at("gap").get<double>();
    rep.certificate.tolerance = c.at("tolerance").get<double>();
    rep.certificate.pass = c.at("pass").get<bool>();
    if (j.contains("cross_check")) {
        rep.cross_check = CrossCheck{j["cross_check"].at("numeric_p_guess").get<double>(),
                                     j["cross_check"].at("difference").get<double>()};
    }
    rep.iterations = j.at("iterations").get<int>();
    rep.wall_time_ms = j.at("wall_time_ms").get<double>();
    return rep;
}

}  // namespace qsd
