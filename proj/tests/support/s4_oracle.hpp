#pragma once

#include <array>
#include <cmath>

#include "pspec/spectra_model.hpp"
#include "quadrature.hpp"

// Quadrature oracle for the two omega-integral terms of the fourth-order
// spectrum, independent of the closed-form residue reduction in the library:
// the integrands are assembled directly from the eigenvalue resolvent sums
// and integrated numerically over the whole real line.

namespace testsupport {

/// Same quantity as pspec::s4_integral_terms (the bracket contribution
/// -sum_perm (I1 + I2), no beta^8), evaluated by adaptive quadrature.
inline Cx s4_integral_terms_quadrature(const pspec::EigenSpectra& es, double w1, double w2,
                                       double rel_tol) {
    const int K = es.modes();
    auto gvec = [&](double w, int i) { return -1.0 / (es.lambda(i) + Cx(0.0, w)); };

    const double wtuple[4] = {w1, w2, -w1, -w2};
    double scale = 0;
    for (int i = 0; i < K; ++i) scale = std::max(scale, std::abs(es.lambda(i).real()));
    double lo = scale;
    for (int i = 0; i < K; ++i) lo = std::min(lo, std::abs(es.lambda(i).real()));
    const double subst_scale = std::sqrt(std::max(lo, 1e-12) * std::max(scale, 1e-12));

    Cx total = 0;
    double magnitude = 0;
    for (int l = 0; l < 4; ++l) {
        for (int m = 0; m < 4; ++m) {
            for (int n = 0; n < 4; ++n) {
                if (l == m || l == n || m == n) continue;
                const double f1 = wtuple[n];
                const double f2 = wtuple[m] + wtuple[n];
                const double f3 = wtuple[l] + wtuple[m] + wtuple[n];
                auto integrand = [&](double w) {
                    Cx tr1a = 0, tr2a = 0, tr1b = 0, tr2b = 0;
                    for (int i = 0; i < K; ++i) {
                        const Cx tb = es.t(i) * es.b(i);
                        tr1a += tb * gvec(f1, i) * gvec(f2 - w, i);
                        tr2a += tb * gvec(w, i) * gvec(f3, i);
                        tr1b += tb * gvec(f1, i) * gvec(f3, i) * gvec(f2 - w, i);
                        tr2b += tb * gvec(w, i);
                    }
                    return tr1a * tr2a + tr1b * tr2b;
                };
                // Rough magnitude for the absolute tolerance.
                const double probe = std::abs(integrand(0.0)) * subst_scale + 1e-300;
                Cx integral = integrate_real_line(integrand, subst_scale,
                                                  rel_tol * probe);
                const Cx term = -integral / (2.0 * 3.14159265358979323846);
                total += term;
                magnitude += std::abs(term);
            }
        }
    }
    (void)magnitude;
    return total;
}

} // namespace testsupport
