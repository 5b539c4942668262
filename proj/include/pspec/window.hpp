#pragma once

namespace pspec {

enum class WindowKind {
    ConfinedGaussian, // approximate confined Gaussian, sigma_t = sigma_rel * T
    Rectangular,
};

/// Window value g(t) for t in [0, T]. The shape depends only on t/T, so the
/// power norms below are T-independent.
double window_value(WindowKind kind, double t, double frame_length, double sigma_rel = 0.14);

/// w_n = (1/T) Int_0^T g(t)^n dt for n = 1..4.
struct WindowNorms {
    double w1, w2, w3, w4;
    double operator[](int n) const; // n in 1..4
};

WindowNorms window_norms(WindowKind kind, double sigma_rel = 0.14);

const char* window_name(WindowKind kind);

} // namespace pspec
