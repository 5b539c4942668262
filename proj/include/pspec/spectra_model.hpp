#pragma once

#include <vector>

#include "pspec/model.hpp"

// Closed-form quantum polyspectra S1..S4 of a continuously measured
// Lindblad system, evaluated from the spectral decomposition of L'.
//
// With G'(omega) = sum_{i != 0} [-1/(lambda_i + i omega)] r_i l_i the trace
// chains reduce to small sums over nonzero eigenmodes; the two
// omega-integrals of the fourth-order spectrum close over eigenvalue pairs:
//   (1/2pi) Int g_i(c - w) g_j(w) dw = -1 / (lambda_i + lambda_j + i c).

namespace pspec {

struct FrequencyGrid {
    std::vector<double> values; // kHz angular frequency, strictly ascending

    static FrequencyGrid linspace(double lo, double hi, int n);
    void validate() const;
    int size() const { return static_cast<int>(values.size()); }
};

/// Reduced eigenbasis of one system: everything the spectra formulas need.
/// Modes that cannot participate in any trace chain (zero coupling to the
/// measurement vector on both sides) are pruned; for Markov-diagonal systems
/// this keeps only the diagonal-sector modes.
struct EigenSpectra {
    CVec lambda;     // kept nonzero eigenvalues of L'
    CVec t;          // Tr[A' r_i]
    CVec b;          // <l_i, vec(A' rho0)>
    CMat M;          // <l_i, A' r_j> coupling between kept modes
    double a_mean;   // Tr[cal A rho0]
    double beta_sq;

    int modes() const { return static_cast<int>(lambda.size()); }

    static EigenSpectra build(const LindbladSystem& sys, const DensityMatrix& rho0,
                              const SpectralDecomposition& decomp);
    static EigenSpectra build(const LindbladSystem& sys);
};

/// Fourier-transformed propagator G'(omega) with the zero mode excluded,
/// as an explicit superoperator (for tests and small systems).
Superoperator resolvent(const SpectralDecomposition& decomp, double omega);

double s1(const EigenSpectra& es);
double s2_point(const EigenSpectra& es, double omega, bool include_shot_noise);
Complex s3_point(const EigenSpectra& es, double w1, double w2);
/// Trispectrum on the cut (w1, w2, -w1, -w2); real up to round-off.
double s4_point(const EigenSpectra& es, double w1, double w2);
/// Sum over permutations of the two closed-form omega-integral terms of the
/// fourth-order spectrum (the parts subtracted inside the bracket), exposed
/// separately so they can be cross-checked against numerical quadrature.
Complex s4_integral_terms(const EigenSpectra& es, double w1, double w2);

struct ModelSpectraOptions {
    bool include_shot_noise = false; // beta^2/4 white-noise floor in S2
    bool orders[4] = {true, true, true, true};
    bool parallel = true;
};

struct ModelSpectra {
    FrequencyGrid grid; // shared axis for s2, s3, s4
    double s1 = 0;
    std::vector<double> s2;
    Eigen::MatrixXcd s3; // s3(i,j) at (grid[i], grid[j])
    Eigen::MatrixXd s4;  // cut (grid[i], grid[j], -grid[i])
    EmitterParams params{};
    bool has_params = false;
    bool shot_noise_included = false;
};

ModelSpectra evaluate_model_spectra(const LindbladSystem& sys, const FrequencyGrid& grid,
                                    const ModelSpectraOptions& opts = {});
ModelSpectra evaluate_model_spectra_serial(const LindbladSystem& sys, const FrequencyGrid& grid,
                                           ModelSpectraOptions opts = {});

/// Default evaluation grid: n points spanning +-span_rate_multiple*(rate scale).
FrequencyGrid default_grid(double rate_scale_khz, int n = 64, double span_multiple = 20.0);

} // namespace pspec
