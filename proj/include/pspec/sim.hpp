#pragma once

#include <cstdint>
#include <vector>

#include "pspec/click_record.hpp"
#include "pspec/params.hpp"

// Statistically exact synthetic data: continuous-time Markov occupation
// paths, Poisson photon clicks during bright intervals, and rendered
// detector traces. Replaces stochastic-master-equation integration with the
// equivalent jump process.

namespace pspec {

/// Telegraph path of the bright/dark occupation.
struct OccupationPath {
    std::vector<double> switch_times_ms; // ascending, within (0, duration)
    bool initial_bright = true;
    double duration_ms = 0;

    double bright_time_ms() const;
    double bright_fraction() const { return bright_time_ms() / duration_ms; }
    /// Dwell intervals as (length_ms, was_bright) pairs, boundary-clipped.
    std::vector<std::pair<double, bool>> dwells() const;
};

/// Exact two-state Markov chain: exponential dwells, initial state drawn
/// from the steady-state law. gamma_in exits bright, gamma_out exits dark.
OccupationPath simulate_occupation(double gamma_in, double gamma_out, double duration_ms,
                                   uint64_t seed);

/// Homogeneous Poisson clicks at rate gamma_ph restricted to bright
/// intervals (gamma_det -> infinity limit of the four-state model).
ClickRecord simulate_clicks(const OccupationPath& path, double gamma_ph, uint64_t seed);

/// Exact four-state jump simulation (includes detector dead time); a click
/// is recorded at every photon arrival (3 -> 4 transition).
ClickRecord simulate_emitter_clicks_exact(const EmitterParams& p, double duration_ms,
                                          uint64_t seed);

/// Each click becomes a box pulse of height 1 and Exp(gamma_det) length;
/// overlapping pulses saturate at 1. Returns z(t)/beta^2 sampled at dt.
std::vector<double> render_trace(const ClickRecord& clicks, double gamma_det, double dt_ms,
                                 uint64_t seed);

} // namespace pspec
