#pragma once

#include <cstdint>

namespace pspec {

/// Rates of the four-state blinking-emitter model, all in kHz. Internally
/// all times are milliseconds, so rate*time is dimensionless.
///
/// State convention (uncharged dot emits):
///   1 = charged (dark), no photon in detector
///   2 = charged (dark), photon in detector
///   3 = uncharged (bright), no photon
///   4 = uncharged (bright), photon in detector
/// gamma_in charges the dot (bright -> dark, 3->1 and 4->2),
/// gamma_out uncharges it (1->3, 2->4), gamma_ph emits a photon (3->4),
/// gamma_det removes the photon from the detector (4->3, 2->1).
struct EmitterParams {
    double gamma_in = 0;
    double gamma_out = 0;
    double gamma_ph = 0;
    double gamma_det = 0;
    double beta_sq = 0;

    /// Steady-state probability of the bright (uncharged) manifold.
    double bright_fraction() const { return gamma_out / (gamma_in + gamma_out); }

    /// Mean detected click rate in kHz, ignoring detector dead time.
    double mean_click_rate() const { return gamma_ph * bright_fraction(); }
};

inline constexpr double kMsPerSecond = 1e3;

inline double seconds_to_ms(double s) { return s * kMsPerSecond; }
inline double ms_to_seconds(double ms) { return ms / kMsPerSecond; }

} // namespace pspec
