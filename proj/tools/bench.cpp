// Benchmark of the OpenMP kernels against their serial reference paths.
// Both must agree bit for bit; the table reports timings, speedup, and the
// maximum absolute difference.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>

#include "pspec/estimator.hpp"
#include "pspec/rng.hpp"
#include "pspec/sim.hpp"
#include "pspec/spectra_model.hpp"

using namespace pspec;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void row(const std::string& name, double serial_s, double parallel_s, double max_diff) {
    std::printf("%-34s %9.3f s %9.3f s %6.2fx   max|diff| = %g\n", name.c_str(), serial_s,
                parallel_s, serial_s / parallel_s, max_diff);
}

} // namespace

int main(int argc, char** argv) {
    double duration_s = 30.0;
    if (argc > 1) duration_s = std::stod(argv[1]);
    std::printf("threads available: %d\n", omp_get_max_threads());
    std::printf("%-34s %11s %11s %8s\n", "kernel", "serial", "parallel", "speedup");

    // Click-record estimation.
    {
        EmitterParams p{2.7, 8.0, 150.0, 1e5, 1e5};
        OccupationPath path =
            simulate_occupation(p.gamma_in, p.gamma_out, seconds_to_ms(duration_s), 1);
        ClickRecord clicks = simulate_clicks(path, p.gamma_ph, 1);

        EstimationConfig cfg;
        const double g = p.gamma_in + p.gamma_out;
        cfg.frame_length_ms = 2 * 3.14159265358979324 * 10 / g;
        cfg.n_freq = 64;
        cfg.max_freq_khz = 20 * g;
        cfg.resampling_count = 50;
        cfg.batch_count = 50;
        cfg.seed = 7;

        auto t0 = clock_type::now();
        SpectraSet serial = estimate_spectra_serial(clicks, cfg);
        double ts = seconds_since(t0);
        t0 = clock_type::now();
        SpectraSet parallel = estimate_spectra(clicks, cfg);
        double tp = seconds_since(t0);

        double diff = std::abs(serial.s1 - parallel.s1);
        for (size_t i = 0; i < serial.s2.size(); ++i)
            diff = std::max(diff, std::abs(serial.s2[i] - parallel.s2[i]));
        diff = std::max(diff, (serial.s3 - parallel.s3).cwiseAbs().maxCoeff());
        diff = std::max(diff, (serial.s4 - parallel.s4).cwiseAbs().maxCoeff());
        char label[64];
        std::snprintf(label, sizeof(label), "estimate_spectra (%.2g clicks)",
                      static_cast<double>(clicks.size()));
        row(label, ts, tp, diff);
    }

    // Analytic spectra on a grid.
    {
        EmitterParams p{0.27, 0.8, 298.0, 5000.0, 25000.0};
        LindbladSystem sys = emitter_system(p);
        FrequencyGrid grid = default_grid(p.gamma_in + p.gamma_out, 96);

        auto t0 = clock_type::now();
        ModelSpectra serial = evaluate_model_spectra_serial(sys, grid);
        double ts = seconds_since(t0);
        t0 = clock_type::now();
        ModelSpectra parallel = evaluate_model_spectra(sys, grid);
        double tp = seconds_since(t0);

        double diff = (serial.s4 - parallel.s4).cwiseAbs().maxCoeff();
        diff = std::max(diff, (serial.s3 - parallel.s3).cwiseAbs().maxCoeff());
        row("model spectra S1..S4 (96x96 grid)", ts, tp, diff);
    }
    return 0;
}
