#pragma once

#include <cmath>
#include <stdexcept>

namespace exptrack {

// Lower real branch W_{-1} of the Lambert W function on [-1/e, 0).
// Initial guess: series in sqrt(2(1+e*x)) near the branch point, asymptotic
// log expansion towards zero; polished with Halley steps until the residual
// |w e^w - x| drops below 1e-13 |x|.
inline double lambert_w_minus1(double x) {
    constexpr double kInvE = 0.36787944117144233;  // 1/e
    if (!(x >= -kInvE) || !(x < 0.0))
        throw std::domain_error("lambert_w_minus1: argument outside [-1/e, 0)");

    const double t = 1.0 + x / kInvE;  // 0 at the branch point
    double w;
    if (t <= 0.0) return -1.0;
    if (t < 0.25) {
        const double s = std::sqrt(2.0 * t);
        w = -1.0 - s - s * s / 3.0 - 11.0 / 72.0 * s * s * s;
    } else {
        const double l1 = std::log(-x);
        const double l2 = std::log(-l1);
        w = l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1);
        if (!(w < -1.0)) w = -1.0 - std::sqrt(2.0 * t);
    }

    for (int i = 0; i < 64; ++i) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        if (std::abs(f) <= 1e-13 * std::abs(x)) break;
        const double d1 = ew * (w + 1.0);
        const double denom = d1 - (w + 2.0) * f / (2.0 * (w + 1.0));
        double step = f / denom;
        double next = w - step;
        if (next >= -1.0) next = 0.5 * (w - 1.0);  // stay on the lower branch
        if (next == w) break;
        w = next;
    }
    return w;
}

// Mixer weight with the closed-form optimum alpha* = -0.5 / W_{-1}(-0.5 e^{-0.5} M^{-2});
// satisfies alpha (4 ln M - 2 ln alpha + 1) = 1.
inline double alpha_star(int experts) {
    if (experts < 2)
        throw std::invalid_argument("alpha_star: need at least 2 experts");
    const double m = static_cast<double>(experts);
    const double arg = -0.5 * std::exp(-0.5) / (m * m);
    return -0.5 / lambert_w_minus1(arg);
}

// Objective whose minimizer trades the self-distance term against the
// path-weighted term of the truncated-update guarantee.
inline double mixer_objective(int experts, double path_budget, double alpha) {
    const double m = static_cast<double>(experts);
    const double om = 1.0 - alpha;
    return std::log(m * m / alpha) / (om * om) + std::log(m / alpha) / om * path_budget;
}

// Numerical minimizer of mixer_objective over (0,1) by golden-section search.
inline double alpha_hat(int experts, double path_budget) {
    if (experts < 2)
        throw std::invalid_argument("alpha_hat: need at least 2 experts");
    if (!(path_budget >= 0.0))
        throw std::invalid_argument("alpha_hat: negative path budget");
    constexpr double kGolden = 0.6180339887498949;
    double lo = 1e-14, hi = 1.0 - 1e-14;
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = mixer_objective(experts, path_budget, x1);
    double f2 = mixer_objective(experts, path_budget, x2);
    while (hi - lo > 1e-10) {
        if (f1 <= f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = mixer_objective(experts, path_budget, x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = mixer_objective(experts, path_budget, x2);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace exptrack
