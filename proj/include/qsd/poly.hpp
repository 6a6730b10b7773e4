#pragma once

// Real roots of low-degree polynomials with multiplicities. Closed forms
// (stable quadratic formula, trigonometric/Cardano cubic, Ferrari quartic)
// plus a Newton polish per root; an iterative bisection/deflation fallback
// covers the near-degenerate discriminants where the closed forms lose
// accuracy. Coefficients are passed lowest-degree-last in the argument list
// (c3*x^3 + c2*x^2 + c1*x + c0).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace qsd {

struct RealRoot {
    double value = 0.0;
    int multiplicity = 1;
};

namespace detail {

// Roots closer than this (relative) collapse into one root whose
// multiplicity is the cluster size.
inline constexpr double kRootMergeRel = 1e-7;
// Leading coefficient below this fraction of the largest coefficient is
// treated as zero.
inline constexpr double kLeadingRel = 1e-14;
// Residual bound used to decide that the closed form needs the fallback.
inline constexpr double kResidualRel = 1e-8;

inline double poly_eval(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (double ci : c) v = v * x + ci;  // c is highest-degree-first
    return v;
}

inline double poly_deriv(const std::vector<double>& c, double x) {
    const int n = static_cast<int>(c.size()) - 1;
    double v = 0.0;
    for (int i = 0; i < n; ++i) v = v * x + c[static_cast<std::size_t>(i)] * (n - i);
    return v;
}

// A few Newton steps, kept only while the residual improves. Safe at
// multiple roots: the step is simply rejected when it does not help.
inline double newton_polish(const std::vector<double>& c, double x) {
    double best = x;
    double best_res = std::abs(poly_eval(c, x));
    for (int it = 0; it < 8; ++it) {
        const double d = poly_deriv(c, x);
        if (d == 0.0 || !std::isfinite(d)) break;
        const double next = x - poly_eval(c, x) / d;
        if (!std::isfinite(next)) break;
        const double res = std::abs(poly_eval(c, next));
        if (res < best_res) {
            best = next;
            best_res = res;
        }
        if (next == x) break;
        x = next;
    }
    return best;
}

inline std::vector<RealRoot> merge_roots(std::vector<double> raw) {
    std::vector<RealRoot> out;
    if (raw.empty()) return out;
    std::sort(raw.begin(), raw.end());
    out.push_back({raw[0], 1});
    for (std::size_t i = 1; i < raw.size(); ++i) {
        RealRoot& last = out.back();
        if (std::abs(raw[i] - last.value) <= kRootMergeRel * (1.0 + std::abs(raw[i]))) {
            ++last.multiplicity;  // keep the first (smallest) representative
        } else {
            out.push_back({raw[i], 1});
        }
    }
    return out;
}

inline double max_abs_coeff(const std::vector<double>& c) {
    double m = 0.0;
    for (double ci : c) m = std::max(m, std::abs(ci));
    return m;
}

inline void require_leading(const std::vector<double>& c) {
    const double m = max_abs_coeff(c);
    if (m == 0.0 || std::abs(c[0]) <= kLeadingRel * m) {
        throw DegenerateLeadingCoefficientError(
            "leading polynomial coefficient is numerically zero; reduce the degree");
    }
}

// Raw real roots of a monic-normalizable quadratic. A slightly negative
// discriminant (within rounding of zero) is reported as a double root at the
// vertex; a genuinely negative one yields no roots.
inline std::vector<double> quadratic_raw(double c2, double c1, double c0) {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    const double scale = std::max(c1 * c1, std::abs(4.0 * c2 * c0));
    if (disc < -1e-12 * scale) return {};
    if (disc <= 1e-12 * scale) {
        const double v = -c1 / (2.0 * c2);
        return {v, v};
    }
    // Stable form: avoid cancellation between -c1 and sqrt(disc).
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
    const double r0 = q / c2;
    const double r1 = (q != 0.0) ? c0 / q : -c1 / c2 - r0;
    return {r0, r1};
}

// Raw real roots of a monic cubic x^3 + a2 x^2 + a1 x + a0.
inline std::vector<double> cubic_raw(double a2, double a1, double a0) {
    // Depressed form y^3 + p y + q with x = y - a2/3.
    const double shift = a2 / 3.0;
    const double p = a1 - a2 * a2 / 3.0;
    const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    const double half_q = 0.5 * q;
    const double delta = half_q * half_q + p * p * p / 27.0;  // = -disc/108
    const double scale =
        std::max({half_q * half_q, std::abs(p * p * p / 27.0), 1e-300});

    std::vector<double> ys;
    if (delta > 1e-14 * scale) {
        // One real root; stable Cardano.
        const double w = -half_q - std::copysign(std::sqrt(delta), q);
        const double u = std::cbrt(w);
        ys.push_back(u != 0.0 ? u - p / (3.0 * u) : std::cbrt(-q));
    } else if (p < 0.0) {
        // Three real roots (delta <= 0 requires p <= 0); trigonometric form.
        const double rho = 2.0 * std::sqrt(-p / 3.0);
        double cosarg = 3.0 * q / (p * rho);
        cosarg = std::clamp(cosarg, -1.0, 1.0);
        const double phi = std::acos(cosarg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            ys.push_back(rho * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0));
        }
    } else {
        // p and q both vanish to rounding: triple root at y = 0.
        ys.assign(3, 0.0);
    }
    for (double& y : ys) y -= shift;
    return ys;
}

// Raw real roots of a monic quartic x^4 + a3 x^3 + a2 x^2 + a1 x + a0
// (Ferrari: factor the depressed quartic into two quadratics).
inline std::vector<double> quartic_raw(double a3, double a2, double a1, double a0) {
    const double shift = a3 / 4.0;
    const double a3_2 = a3 * a3;
    const double p = a2 - 3.0 * a3_2 / 8.0;
    const double q = a1 - a3 * a2 / 2.0 + a3_2 * a3 / 8.0;
    const double r = a0 - a3 * a1 / 4.0 + a3_2 * a2 / 16.0 - 3.0 * a3_2 * a3_2 / 256.0;

    const double qscale = std::max({std::abs(p), std::abs(r), 1.0});
    std::vector<double> ys;
    if (std::abs(q) <= 1e-13 * qscale) {
        // Biquadratic: y^4 + p y^2 + r = 0.
        for (double z : quadratic_raw(1.0, p, r)) {
            if (z < 0.0) {
                if (z > -1e-12 * qscale) z = 0.0;
                else continue;
            }
            const double y = std::sqrt(z);
            ys.push_back(y);
            ys.push_back(-y);
        }
    } else {
        // Resolvent cubic 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0. Its value
        // at m=0 is -q^2 < 0, so the largest real root is positive; use it.
        double m = 0.0;
        for (double cand : cubic_raw(p, (2.0 * p * p - 8.0 * r) / 8.0, -q * q / 8.0)) {
            m = std::max(m, cand);
        }
        if (m <= 0.0) return ys;  // fallback path will handle
        const double s = std::sqrt(2.0 * m);
        const double A = p / 2.0 + m - q / (2.0 * s);
        const double B = p / 2.0 + m + q / (2.0 * s);
        for (double y : quadratic_raw(1.0, s, A)) ys.push_back(y);
        for (double y : quadratic_raw(1.0, -s, B)) ys.push_back(y);
    }
    for (double& y : ys) y -= shift;
    return ys;
}

// Bisection + Newton hybrid over [lo, hi] given a sign change.
inline double bisect_root(const std::vector<double>& c, double lo, double hi) {
    double flo = poly_eval(c, lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = poly_eval(c, mid);
        if (fm == 0.0 || hi - lo <= 1e-16 * (1.0 + std::abs(mid))) return mid;
        if ((flo < 0.0) != (fm < 0.0)) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// Iterative fallback: scan a Cauchy-bound bracket for sign changes, refine,
// deflate, repeat. Used only when the closed form leaves a bad residual.
inline std::vector<double> deflation_raw(std::vector<double> c) {
    std::vector<double> roots;
    while (c.size() > 3) {
        double bound = 0.0;
        for (std::size_t i = 1; i < c.size(); ++i) {
            bound = std::max(bound, std::abs(c[i] / c[0]));
        }
        bound += 1.0;
        const int kSteps = 2048;
        double found = 0.0;
        bool have = false;
        double prev_x = -bound;
        double prev_f = poly_eval(c, prev_x);
        for (int i = 1; i <= kSteps; ++i) {
            const double x = -bound + 2.0 * bound * i / kSteps;
            const double f = poly_eval(c, x);
            if (f == 0.0) {
                found = x;
                have = true;
                break;
            }
            if ((prev_f < 0.0) != (f < 0.0)) {
                found = bisect_root(c, prev_x, x);
                have = true;
                break;
            }
            prev_x = x;
            prev_f = f;
        }
        if (!have) break;  // no further real roots resolvable
        found = newton_polish(c, found);
        roots.push_back(found);
        // Synthetic division by (x - found).
        std::vector<double> quot(c.size() - 1);
        double carry = 0.0;
        for (std::size_t i = 0; i + 1 < c.size(); ++i) {
            carry = c[i] + carry * found;
            quot[i] = carry;
        }
        c = std::move(quot);
    }
    if (c.size() == 3) {
        for (double x : quadratic_raw(c[0], c[1], c[2])) roots.push_back(x);
    } else if (c.size() == 2) {
        roots.push_back(-c[1] / c[0]);
    }
    return roots;
}

inline std::vector<RealRoot> finish(const std::vector<double>& coeffs, std::vector<double> raw) {
    for (double& x : raw) x = newton_polish(coeffs, x);
    const double bound = kResidualRel * max_abs_coeff(coeffs);
    bool bad = false;
    for (double x : raw) {
        if (std::abs(poly_eval(coeffs, x)) > bound) bad = true;
    }
    // An odd-degree polynomial always has a real root.
    if (raw.empty() && coeffs.size() % 2 == 0) bad = true;
    if (bad) {
        raw = deflation_raw(coeffs);
        for (double& x : raw) x = newton_polish(coeffs, x);
    }
    return merge_roots(std::move(raw));
}

}  // namespace detail

inline std::vector<RealRoot> real_roots_quadratic(double c2, double c1, double c0) {
    const std::vector<double> c{c2, c1, c0};
    detail::require_leading(c);
    return detail::finish(c, detail::quadratic_raw(c2, c1, c0));
}

inline std::vector<RealRoot> real_roots_cubic(double c3, double c2, double c1, double c0) {
    const std::vector<double> c{c3, c2, c1, c0};
    detail::require_leading(c);
    return detail::finish(c, detail::cubic_raw(c2 / c3, c1 / c3, c0 / c3));
}

inline std::vector<RealRoot> real_roots_quartic(double c4, double c3, double c2, double c1,
                                                double c0) {
    const std::vector<double> c{c4, c3, c2, c1, c0};
    detail::require_leading(c);
    return detail::finish(c, detail::quartic_raw(c3 / c4, c2 / c4, c1 / c4, c0 / c4));
}

}  // namespace qsd
