#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include <qsd/analytic.hpp>
#include <qsd/povm.hpp>
#include <qsd/problem_io.hpp>
#include <qsd/report.hpp>

using namespace qsd;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("parse_problem reads the matrix encoding", "[io]") {
    const std::string text = R"({
      "schema": "qsd-problem/1",
      "states": [
        {"label": "A", "prior": 0.5,
         "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
        {"label": "B", "prior": 0.5,
         "matrix": [[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]]}
      ]
    })";
    const auto prob = parse_problem_text(text);
    REQUIRE(prob.ensemble.size() == 2);
    REQUIRE(prob.ensemble.label(0) == "A");
    REQUIRE(prob.ensemble.op(0).p == Catch::Approx(0.5));
    REQUIRE(norm(prob.ensemble.op(0).r - Vec3{0, 0, 0.5}) < 1e-15);
    REQUIRE(norm(prob.ensemble.op(1).r - Vec3{0.5, 0, 0}) < 1e-15);
    REQUIRE_FALSE(prob.tolerance.has_value());
    REQUIRE_FALSE(prob.method.has_value());
}

TEST_CASE("parse_problem reads the Bloch encoding with default labels", "[io]") {
    const std::string text = R"({
      "schema": "qsd-problem/1",
      "states": [
        {"p": 0.5, "r": [0, 0, 0.5]},
        {"p": 0.5, "r": [0.5, 0, 0]}
      ],
      "settings": {"tolerance": 1e-7, "method": "both"}
    })";
    const auto prob = parse_problem_text(text);
    REQUIRE(prob.ensemble.label(0) == "s0");
    REQUIRE(prob.ensemble.label(1) == "s1");
    REQUIRE(prob.tolerance == 1e-7);
    REQUIRE(prob.method == "both");
}

TEST_CASE("parse_problem rejects malformed documents", "[io]") {
    auto wrap = [](const std::string& states, const std::string& extra = "") {
        return R"({"schema": "qsd-problem/1", "states": [)" + states + "]" + extra + "}";
    };

    REQUIRE_THROWS_WITH(parse_problem_text("{not json"), ContainsSubstring("not valid JSON"));
    REQUIRE_THROWS_WITH(parse_problem_text(R"({"schema": "qsd-problem/2", "states": []})"),
                        ContainsSubstring("qsd-problem/1"));
    REQUIRE_THROWS_WITH(parse_problem_text(R"({"schema": "qsd-problem/1", "states": []})"),
                        ContainsSubstring("at least one state"));

    // mixing matrix and Bloch fields, within one state or across states
    REQUIRE_THROWS_WITH(
        parse_problem_text(wrap(R"({"prior": 0.5, "p": 0.5, "r": [0, 0, 0.5]})")),
        ContainsSubstring("either {prior, matrix} or {p, r}"));
    REQUIRE_THROWS_WITH(
        parse_problem_text(wrap(R"({"p": 0.5, "r": [0, 0, 0.5]},
            {"prior": 0.5, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]})")),
        ContainsSubstring("may not be mixed"));

    // shape errors
    REQUIRE_THROWS_WITH(
        parse_problem_text(wrap(R"({"prior": 1.0, "matrix": [[[1, 0]], [[0, 0]]]})")),
        ContainsSubstring("matrix must be 2x2"));
    REQUIRE_THROWS_WITH(parse_problem_text(wrap(R"({"p": 1.0, "r": [0, 0]})")),
                        ContainsSubstring("r must be a 3-vector"));
    REQUIRE_THROWS_WITH(
        parse_problem_text(wrap(R"({"prior": -0.5, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]})")),
        ContainsSubstring("prior must be positive"));

    // the invariant is named when priors do not sum to one
    REQUIRE_THROWS_WITH(
        parse_problem_text(wrap(R"({"p": 0.5, "r": [0, 0, 0.5]}, {"p": 0.4, "r": [0, 0, -0.4]})")),
        ContainsSubstring("priors must sum to 1"));

    // a non-PSD state names the offending label
    REQUIRE_THROWS_WITH(
        parse_problem_text(wrap(R"({"label": "bad", "p": 0.5, "r": [0.6, 0, 0]},
                                   {"p": 0.5, "r": [0, 0, 0]})")),
        ContainsSubstring("'bad'"));

    // non-Hermitian matrix
    REQUIRE_THROWS_AS(
        parse_problem_text(wrap(R"({"prior": 1.0, "matrix": [[[1, 0], [0.2, 0]], [[0, 0], [0, 0]]]})")),
        NonHermitianError);

    // settings validation
    REQUIRE_THROWS_WITH(
        parse_problem_text(wrap(R"({"p": 1.0, "r": [0, 0, 0]})",
                                R"(, "settings": {"tolerance": 1.5})")),
        ContainsSubstring("must lie in (0, 1)"));
    REQUIRE_THROWS_WITH(
        parse_problem_text(wrap(R"({"p": 1.0, "r": [0, 0, 0]})",
                                R"(, "settings": {"method": "fast"})")),
        ContainsSubstring("method must be"));
}

TEST_CASE("numbers render with 12 significant digits", "[io]") {
    REQUIRE(detail::fmt12(2.0 / 3) == "0.666666666667");
    REQUIRE(detail::fmt12(0.5) == "0.5");
    REQUIRE(detail::fmt12(1e-9) == "1e-09");
    REQUIRE(detail::fmt12(0.853553390593274) == "0.853553390593");
    // rounding to the printed precision is idempotent
    const double r = detail::round12(1.0 / 3);
    REQUIRE(detail::fmt12(r) == "0.333333333333");
    REQUIRE(detail::round12(r) == r);
}

namespace {

Report trine_report() {
    const double s32 = std::sqrt(3.0) / 2.0;
    const auto ens = Ensemble::from_states({{"A", {1.0 / 3, {0, 0, 1.0 / 3}}},
                                            {"B", {1.0 / 3, {s32 / 3, 0, -0.5 / 3}}},
                                            {"C", {1.0 / 3, {-s32 / 3, 0, -0.5 / 3}}}});
    const auto lag = solve_ensemble(ens, Method::Analytic);
    const auto povm = optimal_povm(lag, ens);
    const auto cert = verify_certificate(ens, lag, povm, 1e-8);
    return build_report(ens, lag, povm, cert, "analytic", 1.25);
}

}  // namespace

TEST_CASE("report JSON carries the full solution", "[io]") {
    const auto rep = trine_report();
    const auto j = to_json(rep);
    REQUIRE(j["schema"] == "qsd-report/1");
    REQUIRE(j["method"] == "analytic");
    REQUIRE(j["case"] == "triplet");
    REQUIRE(j["p_guess"].get<double>() == Catch::Approx(2.0 / 3).margin(1e-11));
    REQUIRE(j["sigma"]["t"] == j["p_guess"]);
    REQUIRE(j["sigma"]["s"].size() == 3);
    REQUIRE(j["active"].size() == 3);
    REQUIRE(j["povm"].size() == 3);
    REQUIRE(j["povm"][0]["label"] == "A");
    REQUIRE(j["povm"][0]["weight"].get<double>() == Catch::Approx(2.0 / 3).margin(1e-11));
    REQUIRE(j["classes"]["B"] == "guessable");
    REQUIRE(j["certificate"]["pass"] == true);
    REQUIRE_FALSE(j.contains("cross_check"));
}

TEST_CASE("report JSON round-trips byte-identically", "[io]") {
    auto rep = trine_report();
    rep.cross_check = CrossCheck{0.666666666666, 1.2e-13};
    const auto j = to_json(rep);
    const auto back = report_from_json(j);
    REQUIRE(to_json(back).dump(2) == j.dump(2));
    REQUIRE(back.kind == SolveCase::Triplet);
    REQUIRE(back.classes.size() == 3);
    REQUIRE(back.cross_check.has_value());
}

TEST_CASE("report text rendering is a flat key-value document", "[io]") {
    const auto rep = trine_report();
    const auto text = to_text(rep);
    REQUIRE_THAT(text, ContainsSubstring("schema: qsd-report/1\n"));
    REQUIRE_THAT(text, ContainsSubstring("case: triplet\n"));
    REQUIRE_THAT(text, ContainsSubstring("p_guess: 0.666666666667\n"));
    REQUIRE_THAT(text, ContainsSubstring("sigma.t: 0.666666666667\n"));
    REQUIRE_THAT(text, ContainsSubstring("povm[0]: label=A weight=0.666666666667"));
    REQUIRE_THAT(text, ContainsSubstring("class.A: guessable\n"));
    REQUIRE_THAT(text, ContainsSubstring("certificate.pass: true\n"));
    REQUIRE_THAT(text, ContainsSubstring("wall_time_ms: 1.25\n"));

    // rejected schema on the way back in
    auto j = to_json(rep);
    j["schema"] = "qsd-report/9";
    REQUIRE_THROWS_AS(report_from_json(j), ValidationError);
}
