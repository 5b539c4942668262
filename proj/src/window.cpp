#include "pspec/window.hpp"

#include <cmath>
#include <stdexcept>

namespace pspec {

namespace {

// Confined Gaussian on the unit interval: G(x) with the two image terms that
// drive the edges to (numerically) zero while keeping minimal bandwidth.
double confined_gaussian_unit(double x, double sigma_rel) {
    auto G = [sigma_rel](double u) {
        double z = (u - 0.5) / (2.0 * sigma_rel);
        return std::exp(-z * z);
    };
    double denom = G(1.0) + G(-1.0);
    return G(x) - G(0.0) * (G(x + 1.0) + G(x - 1.0)) / denom;
}

} // namespace

double window_value(WindowKind kind, double t, double frame_length, double sigma_rel) {
    if (frame_length <= 0) throw std::invalid_argument("frame length must be positive");
    double x = t / frame_length;
    switch (kind) {
        case WindowKind::Rectangular:
            return 1.0;
        case WindowKind::ConfinedGaussian:
            return confined_gaussian_unit(x, sigma_rel);
    }
    throw std::invalid_argument("unknown window kind");
}

WindowNorms window_norms(WindowKind kind, double sigma_rel) {
    if (kind == WindowKind::Rectangular) return {1.0, 1.0, 1.0, 1.0};
    // 64-panel composite Gauss-Legendre (16 nodes/panel) on the unit interval.
    static const double gl_x[8] = {
        0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
        0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499,
    };
    static const double gl_w[8] = {
        0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
        0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541,
    };
    double s[5] = {0, 0, 0, 0, 0};
    const int panels = 64;
    for (int p = 0; p < panels; ++p) {
        double a = static_cast<double>(p) / panels;
        double h = 0.5 / panels;
        double c = a + h;
        for (int q = 0; q < 8; ++q) {
            for (double sign : {-1.0, 1.0}) {
                double x = c + sign * h * gl_x[q];
                double g = confined_gaussian_unit(x, sigma_rel);
                double acc = 1.0;
                for (int n = 1; n <= 4; ++n) {
                    acc *= g;
                    s[n] += gl_w[q] * h * acc;
                }
            }
        }
    }
    return {s[1], s[2], s[3], s[4]};
}

double WindowNorms::operator[](int n) const {
    switch (n) {
        case 1: return w1;
        case 2: return w2;
        case 3: return w3;
        case 4: return w4;
    }
    throw std::invalid_argument("window norm order out of range");
}

const char* window_name(WindowKind kind) {
    switch (kind) {
        case WindowKind::ConfinedGaussian: return "confined_gaussian";
        case WindowKind::Rectangular: return "rectangular";
    }
    return "?";
}

} // namespace pspec
