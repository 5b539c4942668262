#include <doctest.h>

#include <cmath>

#include <initializer_list>

#include "pspec/window.hpp"

using namespace pspec;

TEST_CASE("rectangular window: g == 1 and all norms 1") {
    for (double t : {0.0, 0.3, 0.9})
        CHECK(window_value(WindowKind::Rectangular, t, 1.0) == 1.0);
    WindowNorms w = window_norms(WindowKind::Rectangular);
    CHECK(w.w1 == 1.0);
    CHECK(w.w4 == 1.0);
}

TEST_CASE("confined gaussian is symmetric and edge-confined") {
    const double T = 2.5;
    for (double t : {0.1, 0.37, 1.0, 1.2}) {
        double a = window_value(WindowKind::ConfinedGaussian, t, T);
        double b = window_value(WindowKind::ConfinedGaussian, T - t, T);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
    CHECK(std::abs(window_value(WindowKind::ConfinedGaussian, 0.0, T)) < 1e-12);
    CHECK(std::abs(window_value(WindowKind::ConfinedGaussian, T, T)) < 1e-12);
    CHECK(window_value(WindowKind::ConfinedGaussian, T / 2, T) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("confined gaussian norms match frozen quadrature values") {
    // Independent high-resolution quadrature of g^n on the unit interval.
    WindowNorms w = window_norms(WindowKind::ConfinedGaussian, 0.14);
    CHECK(w.w2 == doctest::Approx(0.34973530917702544).epsilon(1e-10)); // regression constant
    CHECK(w.w1 == doctest::Approx(0.48481562113927584).epsilon(1e-10));
    CHECK(w.w3 == doctest::Approx(0.2862263679086809).epsilon(1e-10));
    CHECK(w.w4 == doctest::Approx(0.24800878218464528).epsilon(1e-10));
}
