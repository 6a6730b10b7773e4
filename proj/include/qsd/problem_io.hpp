#pragma once

// Problem-file parsing. A problem is a JSON document:
//
//   {
//     "schema": "qsd-problem/1",
//     "states": [
//       {"label": "A", "prior": 0.5, "matrix": [[[re,im],[re,im]],
//                                               [[re,im],[re,im]]]},
//       ...
//     ],
//     "settings": {"tolerance": 1e-9, "method": "analytic"}   // optional
//   }
//
// A state is either {prior, matrix} with a 2x2 density matrix (the weighted
// operator is prior * matrix) or {p, r} giving the weighted operator in
// Bloch form directly. The two encodings may not be mixed in one file.
// Labels are optional and default to s0, s1, ...

#include <complex>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bloch.hpp"
#include "errors.hpp"
#include "vec3.hpp"

namespace qsd {

struct Problem {
    Ensemble ensemble;
    std::optional<double> tolerance;
    std::optional<std::string> method;
};

namespace detail {

inline double number_field(const nlohmann::json& j, const std::string& key,
                           const std::string& where) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ValidationError(where + ": missing or non-numeric field '" + key + "'");
    }
    return j[key].get<double>();
}

inline std::complex<double> parse_complex(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ValidationError(where + ": matrix entries must be [re, im] pairs");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline Problem parse_problem(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("problem document must be a JSON object");
    if (!doc.contains("schema") || doc["schema"] != "qsd-problem/1") {
        throw ValidationError("problem schema must be \"qsd-problem/1\"");
    }
    if (!doc.contains("states") || !doc["states"].is_array() || doc["states"].empty()) {
        throw ValidationError("problem must list at least one state");
    }

    int matrix_form = -1;  // -1 undecided, 1 matrix, 0 bloch
    std::vector<WeightedState> states;
    std::size_t i = 0;
    for (const auto& js : doc["states"]) {
        const std::string where = "states[" + std::to_string(i) + "]";
        if (!js.is_object()) throw ValidationError(where + ": state must be an object");
        std::string label = "s" + std::to_string(i);
        if (js.contains("label")) {
            if (!js["label"].is_string()) {
                throw ValidationError(where + ": label must be a string");
            }
            label = js["label"].get<std::string>();
        }
        const bool has_matrix = js.contains("matrix") || js.contains("prior");
        const bool has_bloch = js.contains("p") || js.contains("r");
        if (has_matrix == has_bloch) {
            throw ValidationError(where +
                                  ": state must use either {prior, matrix} or {p, r}");
        }
        if (matrix_form == -1) matrix_form = has_matrix ? 1 : 0;
        if ((matrix_form == 1) != has_matrix) {
            throw ValidationError("state encodings may not be mixed within one file");
        }

        BlochOperator op;
        if (has_matrix) {
            const double prior = detail::number_field(js, "prior", where);
            if (!(prior > 0.0)) {
                throw ValidationError(where + ": prior must be positive (got " +
                                      std::to_string(prior) + ")");
            }
            const auto& jm = js.contains("matrix") ? js["matrix"] : nlohmann::json{};
            if (!jm.is_array() || jm.size() != 2 || !jm[0].is_array() || jm[0].size() != 2 ||
                !jm[1].is_array() || jm[1].size() != 2) {
                throw ValidationError(where + ": matrix must be 2x2");
            }
            Matrix2c m{detail::parse_complex(jm[0][0], where),
                       detail::parse_complex(jm[0][1], where),
                       detail::parse_complex(jm[1][0], where),
                       detail::parse_complex(jm[1][1], where)};
            for (auto& e : m) e *= prior;
            op = from_matrix(m);
        } else {
            op.p = detail::number_field(js, "p", where);
            const auto& jr = js.contains("r") ? js["r"] : nlohmann::json{};
            if (!jr.is_array() || jr.size() != 3 || !jr[0].is_number() ||
                !jr[1].is_number() || !jr[2].is_number()) {
                throw ValidationError(where + ": r must be a 3-vector of numbers");
            }
            op.r = {jr[0].get<double>(), jr[1].get<double>(), jr[2].get<double>()};
        }
        states.push_back({label, op});
        ++i;
    }

    Problem prob{Ensemble::from_states(states), std::nullopt, std::nullopt};
    if (doc.contains("settings")) {
        const auto& s = doc["settings"];
        if (!s.is_object()) throw ValidationError("settings must be an object");
        if (s.contains("tolerance")) {
            const double tol = detail::number_field(s, "tolerance", "settings");
            if (!(tol > 0.0) || !(tol < 1.0)) {
                throw ValidationError("settings.tolerance must lie in (0, 1)");
            }
            prob.tolerance = tol;
        }
        if (s.contains("method")) {
            if (!s["method"].is_string()) {
                throw ValidationError("settings.method must be a string");
            }
            const std::string m = s["method"].get<std::string>();
            if (m != "analytic" && m != "numeric" && m != "both") {
                throw ValidationError("settings.method must be analytic, numeric or both");
            }
            prob.method = m;
        }
    }
    return prob;
}

inline Problem parse_problem_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("problem file is not valid JSON: ") + e.what());
    }
    return parse_problem(doc);
}

inline Problem load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem_text(buf.str());
}

}  // namespace qsd
