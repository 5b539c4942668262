#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "pspec/estimator.hpp"
#include "pspec/params.hpp"

// Simultaneous weighted fit of the analytic polyspectra S1..S4 to estimated
// spectra. Free parameters are (gamma_in, gamma_out, beta_sq), searched in
// log space with a derivative-free simplex; gamma_ph is eliminated through
// the click-count constraint and gamma_det is held fixed.

namespace pspec {

struct FitConfig {
    bool orders[4] = {true, true, true, true};
    double gamma_det_fixed = 1e5; // kHz
    int max_evals = 2000;         // objective evaluations per start
    double simplex_tol = 1e-5;    // relative simplex size
    std::vector<std::array<double, 2>> initial_guesses; // optional (gamma_in, gamma_out) starts
    int n_subsets = 10;
    uint64_t seed = 0;
    bool parallel = true;

    void validate() const;
};

struct FitResult {
    double gamma_in = 0, gamma_out = 0, beta_sq = 0, gamma_ph = 0;
    double gamma_in_sigma = std::nan(""), gamma_out_sigma = std::nan("");
    double beta_sq_sigma = std::nan(""), gamma_ph_sigma = std::nan("");
    bool has_sigma = false;
    double objective = 0;
    int n_points_used = 0;
    int n_points_excluded = 0; // sigma == 0 points, skipped with a warning
    bool converged = false;
    bool budget_exhausted = false;
    int evaluations = 0;
    int best_start = -1;

    struct Start {
        double gamma_in, gamma_out, beta_sq, objective;
        int evaluations;
        bool converged;
    };
    std::vector<Start> starts;

    struct Subset {
        uint64_t seed = 0;
        double alpha = 1;
        double gamma_in = 0, gamma_out = 0, beta_sq = 0, gamma_ph = 0, objective = 0;
        bool converged = false;
        bool failed = false;
    };
    std::vector<Subset> subsets;
};

/// gamma_ph from the count relation: the bright-state fraction of the time
/// axis carries all clicks, so gamma_ph * p_bright = N_click / T_measure.
double gamma_ph_from_counts(uint64_t n_clicks, double duration_ms, double gamma_in,
                            double gamma_out);
double gamma_ph_from_counts(const ClickRecord& clicks, double gamma_in, double gamma_out);

/// Detected click rate of the four-state model (kHz), dead time included.
double emitter_detected_rate(const EmitterParams& p);
/// Count constraint solved exactly on the four-state model: the gamma_ph
/// whose detected rate equals the measured one. Reduces to
/// gamma_ph_from_counts in the gamma_det -> infinity limit.
double gamma_ph_matching_rate(double rate_khz, double gamma_in, double gamma_out,
                              double gamma_det);

/// Weighted chi-square objective between measured spectra and the analytic
/// model at the given rates. Symmetry-duplicated grid cells count once
/// (canonical orbits); complex S3 contributes real and imaginary residuals
/// separately; points with sigma == 0 are excluded.
class Objective {
  public:
    Objective(const SpectraSet& measured, const FitConfig& cfg);

    double operator()(double gamma_in, double gamma_out, double beta_sq) const;

    int points_used() const { return n_used_; }
    int points_excluded() const { return n_excluded_; }
    double click_rate_khz() const { return click_rate_khz_; }

  private:
    struct Slot1 {
        double w1, w2; // frequencies (kHz angular)
        double re, im, sig_re, sig_im;
        bool complex_valued;
    };
    FitConfig cfg_;
    double click_rate_khz_ = 0;
    double s1_ = 0, s1_sigma_ = 0;
    bool use_s1_ = false;
    std::vector<Slot1> s2_, s3_, s4_;
    int n_used_ = 0, n_excluded_ = 0;
    bool parallel_ = true;
};

FitResult fit(const SpectraSet& measured, const FitConfig& cfg);

/// Fig.-6 style error bars: n_subsets independent thinnings at the same
/// alpha, full estimate+fit per subset, mean and scatter across subsets.
FitResult subset_errors(const ClickRecord& clicks, double alpha, const EstimationConfig& est_cfg,
                        const FitConfig& cfg);

// Derivative-free Nelder-Mead simplex minimizer (log-parameter space).
struct SimplexResult {
    std::vector<double> x;
    double fmin = 0;
    int evaluations = 0;
    bool converged = false;
};
SimplexResult nelder_mead(const std::vector<double>& x0, double step,
                          const std::function<double(const std::vector<double>&)>& f,
                          double tol, int max_evals);

} // namespace pspec
