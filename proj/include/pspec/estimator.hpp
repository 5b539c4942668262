#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "pspec/click_record.hpp"
#include "pspec/grid_indexing.hpp"
#include "pspec/window.hpp"

// Polyspectra estimation from click timestamps without binning: windowed
// Fourier coefficients per frame, unbiased multivariate k-statistics across
// frames, exponential-weight Monte Carlo resampling averaged over R
// realizations, and batch-scatter standard errors.

namespace pspec {

using Complex = std::complex<double>;

struct EstimationConfig {
    double frame_length_ms = 0; // T; must be set
    int n_freq = 64;            // grid points per axis
    double max_freq_khz = 0;    // target span (kHz angular); 0 = raw comb span
    WindowKind window = WindowKind::ConfinedGaussian;
    double window_sigma_rel = 0.14;
    bool orders[4] = {true, true, true, true};
    int resampling_count = 100; // R
    int batch_count = 10;       // B
    uint64_t seed = 0;
    bool unit_weights = false;  // diagnostic: b == 1 instead of Exp(1); forces R = 1
    bool parallel = true;
};

/// Frame segmentation and grid placement derived from a config + duration.
struct FramePlan {
    int n_frames = 0;
    double frame_length_ms = 0;
    double comb_khz = 0; // 2*pi/T
    int stride = 1;      // grid spacing in comb bins
    std::vector<int> axis_j; // per-axis comb indices in stride units
    int coeff_count = 0;     // windowed coefficients kept per frame

    double freq_of(int j_stride_units) const { return j_stride_units * stride * comb_khz; }
    int batch_of(int frame, int B) const {
        return static_cast<int>((static_cast<int64_t>(frame) * B) / n_frames);
    }
};

FramePlan plan_frames(const EstimationConfig& cfg, double duration_ms);

struct SpectraSet {
    std::vector<int> axis_j;
    int stride = 1;
    double comb_khz = 0;
    std::vector<double> freq_khz;

    double s1 = 0, s1_sigma = 0;
    std::vector<double> s2, s2_sigma;
    Eigen::MatrixXcd s3;
    Eigen::MatrixXd s3_sigma_re, s3_sigma_im;
    Eigen::MatrixXd s4, s4_sigma;

    EstimationConfig config;
    WindowNorms norms{1, 1, 1, 1};
    int n_frames = 0;
    uint64_t n_clicks = 0;
    double duration_ms = 0;
    double alpha = 1.0;
    bool sampled_source = false;

    int n() const { return static_cast<int>(axis_j.size()); }
    bool has_order(int k) const { return config.orders[k - 1]; }
};

SpectraSet estimate_spectra(const ClickRecord& clicks, const EstimationConfig& cfg);
SpectraSet estimate_spectra_serial(const ClickRecord& clicks, EstimationConfig cfg);

/// Uniformly sampled trace (bin value z_j at t = (j + 1/2) dt).
struct SampledRecord {
    std::vector<double> z;
    double dt_ms = 0;

    double duration_ms() const { return z.size() * dt_ms; }
};

/// Same estimator on a sampled trace: per-frame FFT coefficients, no
/// resampling (the trace already carries pulse areas).
SpectraSet estimate_sampled(const SampledRecord& rec, EstimationConfig cfg);

/// Keep each click independently with probability alpha.
ClickRecord thin(const ClickRecord& clicks, double alpha, uint64_t seed);

/// The Bernoulli keep-mask behind thin(), exposed so file-level thinning can
/// drop clicks without converting the stored payload.
std::vector<uint8_t> thin_mask(size_t n, double alpha, uint64_t seed);

// Building blocks, exposed for tests and cross-checks.

/// Per-frame click lists with times re-referenced to the frame start;
/// floor(duration/T) frames, trailing remainder dropped.
std::vector<std::vector<double>> segment_clicks(const ClickRecord& clicks, double frame_length_ms,
                                                int min_frames = 1);

/// a'_k = sum_j g(t_j) b_j exp(i (2 pi k / T) t_j) for the comb indices k.
Eigen::VectorXcd click_fourier(const std::vector<double>& t_rel_ms,
                               const std::vector<double>& weights, WindowKind window,
                               double sigma_rel, double frame_length_ms,
                               const std::vector<int>& k);

/// a_k = (T/N) sum_j g_j z_j exp(2 pi i j k / N) via FFT.
Eigen::VectorXcd sampled_fourier(const std::vector<double>& z_frame, WindowKind window,
                                 double sigma_rel, double frame_length_ms,
                                 const std::vector<int>& k);

} // namespace pspec
