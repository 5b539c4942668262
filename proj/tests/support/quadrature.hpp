#pragma once

#include <cmath>
#include <complex>
#include <functional>

// Adaptive Gauss-Kronrod (G7/K15) quadrature for the test oracles, with a
// tangent substitution for integrals over the whole real line.

namespace testsupport {

using Cx = std::complex<double>;

struct QuadResult {
    Cx value;
    double error;
};

inline QuadResult gk15(const std::function<Cx(double)>& f, double a, double b) {
    static const double xk[15] = {
        -0.9914553711208126, -0.9491079123427585, -0.8648644233597691, -0.7415311855993945,
        -0.5860872354676911, -0.4058451513773972, -0.2077849550078985, 0.0,
        0.2077849550078985,  0.4058451513773972,  0.5860872354676911,  0.7415311855993945,
        0.8648644233597691,  0.9491079123427585,  0.9914553711208126};
    static const double wk[15] = {
        0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
        0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278,
        0.2044329400752989, 0.1903505780647854, 0.1690047266392679, 0.1406532597155259,
        0.1047900103222502, 0.0630920926299786, 0.0229353220105292};
    static const double wg[7] = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
                                 0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
                                 0.1294849661688697};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Cx k = 0, g = 0;
    for (int i = 0; i < 15; ++i) {
        Cx v = f(c + h * xk[i]);
        k += wk[i] * v;
        if (i % 2 == 1) g += wg[i / 2] * v;
    }
    k *= h;
    g *= h;
    return {k, std::abs(k - g)};
}

inline Cx adaptive(const std::function<Cx(double)>& f, double a, double b, double abs_tol,
                   int depth = 0) {
    QuadResult r = gk15(f, a, b);
    if (r.error < abs_tol || depth > 40) return r.value;
    const double c = 0.5 * (a + b);
    return adaptive(f, a, c, abs_tol / 2, depth + 1) + adaptive(f, c, b, abs_tol / 2, depth + 1);
}

/// Integral of f over (-inf, inf) via omega = scale * tan(u).
inline Cx integrate_real_line(const std::function<Cx(double)>& f, double scale, double abs_tol) {
    auto g = [&](double u) {
        const double t = std::tan(u);
        const double sec2 = 1.0 + t * t;
        return f(scale * t) * (scale * sec2);
    };
    const double half_pi = 1.5707963267948966;
    // Split at 0 so the adaptive refinement handles both wings.
    return adaptive(g, -half_pi + 1e-12, 0.0, abs_tol / 2) +
           adaptive(g, 0.0, half_pi - 1e-12, abs_tol / 2);
}

} // namespace testsupport
