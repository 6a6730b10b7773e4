// Command-line front end. Reads a problem file, solves it with the chosen
// method, prints a report on standard output and encodes the outcome in the
// exit status:
//   0  solved, certificate passed
//   2  malformed input
//   3  solver failed to converge at the requested tolerance
//   4  certificate failure or internal inconsistency

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <qsd/qsd.hpp>

namespace {

// Disagreement threshold for --method both.
constexpr double kCrossCheckTol = 1e-6;

int run(int argc, char** argv) {
    CLI::App app{"Optimal discrimination of qubit state ensembles"};
    std::string input_path;
    std::string method = "analytic";
    double tol = qsd::kDefaultTol;
    bool json_output = false;
    std::uint64_t seed = 0;
    app.add_option("--input", input_path, "Problem file (qsd-problem/1 JSON)")->required();
    app.add_option("--method", method, "Solver path")
        ->check(CLI::IsMember({"analytic", "numeric", "both"}))
        ->capture_default_str();
    auto* tol_opt =
        app.add_option("--tol", tol, "Solver and certificate tolerance")->capture_default_str();
    app.add_flag("--json", json_output, "Emit the report as JSON");
    app.add_option("--seed", seed, "Seed for randomized numeric starts")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    if (!(tol > 0.0) || !(tol < 1.0)) {
        std::cerr << "error: --tol must lie in (0, 1)" << std::endl;
        return 2;
    }

    std::optional<qsd::Problem> loaded;
    try {
        loaded = qsd::load_problem(input_path);
    } catch (const qsd::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    const qsd::Problem& prob = *loaded;
    // File settings apply unless overridden on the command line.
    if (prob.tolerance && tol_opt->count() == 0) tol = *prob.tolerance;
    if (prob.method && app.get_option("--method")->count() == 0) method = *prob.method;

    const auto t0 = std::chrono::steady_clock::now();
    qsd::LagrangeResult lag;
    std::optional<qsd::CrossCheck> cross;
    try {
        if (method == "numeric") {
            const qsd::MinBallResult mb =
                qsd::min_covering_ball(prob.ensemble, tol, 100000, seed);
            lag = {mb.t, mb.s, {}, qsd::SolveCase::Numeric, mb.iterations};
            double scale = 1.0;
            for (const auto& ws : prob.ensemble) {
                scale = std::max(scale, qsd::norm(ws.op.r) + ws.op.p);
            }
            lag.active = qsd::tangent_states(prob.ensemble, lag.t, lag.s,
                                             std::max(1e-7, 10.0 * tol) * scale);
        } else {
            lag = qsd::solve_ensemble(prob.ensemble, qsd::Method::Analytic, tol);
            if (method == "both") {
                const qsd::MinBallResult mb =
                    qsd::min_covering_ball(prob.ensemble, tol, 100000, seed);
                cross = qsd::CrossCheck{mb.t, std::abs(mb.t - lag.t)};
            }
        }
    } catch (const qsd::ConvergenceFailureError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const qsd::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 4;
    }

    int status = 0;
    qsd::Report rep;
    try {
        const qsd::Povm povm = qsd::optimal_povm(lag, prob.ensemble);
        const qsd::CertificateReport cert =
            qsd::verify_certificate(prob.ensemble, lag, povm, tol);
        const auto t1 = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        rep = qsd::build_report(prob.ensemble, lag, povm, cert, method, ms);
        rep.cross_check = cross;
        if (!cert.pass) {
            std::cerr << "error: optimality certificate failed at tolerance "
                      << qsd::detail::fmt12(tol) << std::endl;
            status = 4;
        }
        if (cross && cross->difference > kCrossCheckTol) {
            std::cerr << "error: analytic and numeric solvers disagree by "
                      << qsd::detail::fmt12(cross->difference) << std::endl;
            status = 4;
        }
    } catch (const qsd::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 4;
    }

    if (json_output) {
        std::cout << qsd::to_json(rep).dump(2) << std::endl;
    } else {
        std::cout << qsd::to_text(rep);
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
