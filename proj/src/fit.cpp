#include "pspec/fit.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

#include "pspec/errors.hpp"
#include "pspec/grid_indexing.hpp"
#include "pspec/model.hpp"
#include "pspec/rng.hpp"
#include "pspec/spectra_model.hpp"

namespace pspec {

void FitConfig::validate() const {
    if (!orders[1]) throw ConfigError("the fit requires at least order 2");
    if (max_evals <= 0) throw ConfigError("optimizer budget must be positive");
    if (gamma_det_fixed <= 0) throw ConfigError("gamma_det must be positive");
    if (n_subsets < 1) throw ConfigError("n_subsets must be >= 1");
}

double gamma_ph_from_counts(uint64_t n_clicks, double duration_ms, double gamma_in,
                            double gamma_out) {
    if (n_clicks == 0) throw InsufficientData("empty click record: cannot derive gamma_ph");
    if (gamma_in <= 0 || gamma_out <= 0) throw std::invalid_argument("rates must be positive");
    const double rate = n_clicks / duration_ms; // kHz
    const double p_bright = gamma_out / (gamma_in + gamma_out);
    return rate / p_bright;
}

namespace {

/// Steady state of the classical four-state emitter generator (dimension 4,
/// no superoperator machinery); returns the occupation of each state.
Eigen::Vector4d emitter_populations(const EmitterParams& p) {
    Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
    auto add = [&](int from, int to, double rate) {
        g(to, from) += rate;
        g(from, from) -= rate;
    };
    add(0, 2, p.gamma_out); // 1 -> 3
    add(1, 3, p.gamma_out); // 2 -> 4
    add(2, 0, p.gamma_in);  // 3 -> 1
    add(3, 1, p.gamma_in);  // 4 -> 2
    add(2, 3, p.gamma_ph);  // 3 -> 4
    add(3, 2, p.gamma_det); // 4 -> 3
    add(1, 0, p.gamma_det); // 2 -> 1
    // Replace one balance equation by the normalization.
    Eigen::Matrix4d a = g;
    a.row(3).setOnes();
    Eigen::Vector4d rhs(0, 0, 0, 1);
    return a.partialPivLu().solve(rhs);
}

} // namespace

double emitter_detected_rate(const EmitterParams& p) {
    // Photon arrivals are the 3 -> 4 transitions.
    return p.gamma_ph * emitter_populations(p)(2);
}

double gamma_ph_matching_rate(double rate_khz, double gamma_in, double gamma_out,
                              double gamma_det) {
    // Solve rate = gamma_ph * p3(gamma_ph) by fixed point; p3 depends on
    // gamma_ph only through the detector dead time, so the iteration
    // contracts at ~gamma_ph/gamma_det per step. Starts from the
    // infinite-gamma_det relation rate = gamma_ph * p_bright.
    double gph = rate_khz * (gamma_in + gamma_out) / gamma_out;
    for (int it = 0; it < 4; ++it) {
        EmitterParams p{gamma_in, gamma_out, gph, gamma_det, 1.0};
        double p3 = emitter_populations(p)(2);
        if (!(p3 > 0) || !std::isfinite(p3)) return gph;
        gph = rate_khz / p3;
    }
    return gph;
}

double gamma_ph_from_counts(const ClickRecord& clicks, double gamma_in, double gamma_out) {
    return gamma_ph_from_counts(clicks.size(), clicks.duration_ms, gamma_in, gamma_out);
}

Objective::Objective(const SpectraSet& measured, const FitConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    parallel_ = cfg.parallel;
    click_rate_khz_ = measured.n_clicks / measured.duration_ms;
    GridIndexing idx = GridIndexing::build(measured.axis_j);
    const double sc = measured.stride * measured.comb_khz;
    const int n = idx.n();

    auto push = [&](std::vector<Slot1>& dst, double w1, double w2, double re, double im,
                    double sre, double sim, bool complex_valued) {
        int contributions = complex_valued ? 2 : 1;
        if (sre <= 0 || (complex_valued && sim <= 0)) {
            n_excluded_ += contributions;
            return;
        }
        dst.push_back({w1, w2, re, im, sre, sim, complex_valued});
        n_used_ += contributions;
    };

    if (cfg.orders[0] && measured.has_order(1)) {
        if (measured.s1_sigma > 0) {
            use_s1_ = true;
            s1_ = measured.s1;
            s1_sigma_ = measured.s1_sigma;
            ++n_used_;
        } else {
            ++n_excluded_;
        }
    }
    if (cfg.orders[1] && measured.has_order(2)) {
        for (size_t s = 0; s < idx.s2_unique.size(); ++s) {
            int cell = -1;
            for (int i = 0; i < n && cell < 0; ++i)
                if (idx.s2_slot[i] == static_cast<int>(s)) cell = i;
            push(s2_, idx.s2_unique[s] * sc, 0, measured.s2[cell], 0, measured.s2_sigma[cell], 0,
                 false);
        }
    }
    if (cfg.orders[2] && measured.has_order(3)) {
        std::vector<int> rep(idx.s3_unique.size(), -1);
        for (int c = 0; c < n * n; ++c)
            if (rep[idx.s3_slot[c]] < 0) rep[idx.s3_slot[c]] = c;
        for (size_t s = 0; s < idx.s3_unique.size(); ++s) {
            const int c = rep[s];
            const int i = c / n, j = c % n;
            Complex v = measured.s3(i, j);
            if (idx.s3_conj[c]) v = std::conj(v); // canonical orientation
            push(s3_, idx.s3_unique[s].p * sc, idx.s3_unique[s].q * sc, v.real(), v.imag(),
                 measured.s3_sigma_re(i, j), measured.s3_sigma_im(i, j), true);
        }
    }
    if (cfg.orders[3] && measured.has_order(4)) {
        std::vector<int> rep(idx.s4_unique.size(), -1);
        for (int c = 0; c < n * n; ++c)
            if (rep[idx.s4_slot[c]] < 0) rep[idx.s4_slot[c]] = c;
        for (size_t s = 0; s < idx.s4_unique.size(); ++s) {
            const int c = rep[s];
            const int i = c / n, j = c % n;
            push(s4_, idx.s4_unique[s].p * sc, idx.s4_unique[s].q * sc, measured.s4(i, j), 0,
                 measured.s4_sigma(i, j), 0, false);
        }
    }
    if (n_excluded_ > 0)
        std::fprintf(stderr, "warning: %d spectra points with sigma = 0 excluded from the fit\n",
                     n_excluded_);
}

double Objective::operator()(double gamma_in, double gamma_out, double beta_sq) const {
    constexpr double kPenalty = 1e30;
    if (!(gamma_in > 0) || !(gamma_out > 0) || !(beta_sq > 0)) return kPenalty;
    // Count constraint, re-derived at every evaluation: the model's detected
    // click rate (including the finite-gamma_det dead time) must reproduce
    // the measured one.
    const double gamma_ph =
        gamma_ph_matching_rate(click_rate_khz_, gamma_in, gamma_out, cfg_.gamma_det_fixed);
    if (!std::isfinite(gamma_ph) || gamma_ph <= 0 || gamma_ph > 1e12) return kPenalty;

    EigenSpectra es;
    try {
        es = EigenSpectra::build(emitter_system(
            {gamma_in, gamma_out, gamma_ph, cfg_.gamma_det_fixed, beta_sq}));
    } catch (...) {
        return kPenalty;
    }

    double chi2 = 0;
    if (use_s1_) {
        const double r = (s1(es) - s1_) / s1_sigma_;
        chi2 += r * r;
    }
    std::vector<double> parts;
    try {
        for (const auto& p : s2_) {
            // Click records carry no detector white-noise floor: shot term off.
            const double r = (s2_point(es, p.w1, false) - p.re) / p.sig_re;
            chi2 += r * r;
        }
        for (const auto& p : s3_) {
            const Complex v = s3_point(es, p.w1, p.w2);
            const double rr = (v.real() - p.re) / p.sig_re;
            const double ri = (v.imag() - p.im) / p.sig_im;
            chi2 += rr * rr + ri * ri;
        }
        parts.assign(s4_.size(), 0.0);
#pragma omp parallel for schedule(static) if (parallel_)
        for (size_t s = 0; s < s4_.size(); ++s) {
            const auto& p = s4_[s];
            const double r = (s4_point(es, p.w1, p.w2) - p.re) / p.sig_re;
            parts[s] = r * r;
        }
    } catch (...) {
        return kPenalty;
    }
    for (double p : parts) chi2 += p; // fixed-order reduction
    return std::isfinite(chi2) ? chi2 : kPenalty;
}

SimplexResult nelder_mead(const std::vector<double>& x0, double step,
                          const std::function<double(const std::vector<double>&)>& f,
                          double tol, int max_evals) {
    const int n = static_cast<int>(x0.size());
    std::vector<std::vector<double>> v(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (int i = 0; i < n; ++i) v[i + 1][i] += step;
    int evals = 0;
    for (int i = 0; i <= n; ++i) fv[i] = (++evals, f(v[i]));

    auto order = [&]() {
        std::vector<int> p(n + 1);
        for (int i = 0; i <= n; ++i) p[i] = i;
        std::stable_sort(p.begin(), p.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> v2(n + 1);
        std::vector<double> f2(n + 1);
        for (int i = 0; i <= n; ++i) {
            v2[i] = v[p[i]];
            f2[i] = fv[p[i]];
        }
        v = std::move(v2);
        fv = std::move(f2);
    };

    SimplexResult res;
    while (true) {
        order();
        double size = 0;
        for (int i = 1; i <= n; ++i)
            for (int d = 0; d < n; ++d)
                size = std::max(size, std::abs(v[i][d] - v[0][d]) / (1.0 + std::abs(v[0][d])));
        if (size < tol) {
            res.converged = true;
            break;
        }
        if (evals >= max_evals) break;

        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < n; ++d) centroid[d] += v[i][d] / n;
        auto point = [&](double coeff) {
            std::vector<double> x(n);
            for (int d = 0; d < n; ++d) x[d] = centroid[d] + coeff * (v[n][d] - centroid[d]);
            return x;
        };
        std::vector<double> xr = point(-1.0);
        double fr = (++evals, f(xr));
        if (fr < fv[0]) {
            std::vector<double> xe = point(-2.0);
            double fe = (++evals, f(xe));
            if (fe < fr) {
                v[n] = xe;
                fv[n] = fe;
            } else {
                v[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            v[n] = xr;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            std::vector<double> xc = point(outside ? -0.5 : 0.5);
            double fc = (++evals, f(xc));
            if (fc < std::min(fr, fv[n])) {
                v[n] = xc;
                fv[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int d = 0; d < n; ++d) v[i][d] = v[0][d] + 0.5 * (v[i][d] - v[0][d]);
                    fv[i] = (++evals, f(v[i]));
                }
            }
        }
    }
    order();
    res.x = v[0];
    res.fmin = fv[0];
    res.evaluations = evals;
    return res;
}

namespace {

/// Half-width of the S2 peak above background, used to seed gamma_in+gamma_out.
double lorentzian_halfwidth_seed(const SpectraSet& m) {
    if (m.s2.empty()) return 1.0;
    std::vector<std::pair<double, double>> pts; // (freq, value), positive axis
    for (int i = 0; i < m.n(); ++i)
        if (m.freq_khz[i] >= 0) pts.emplace_back(m.freq_khz[i], m.s2[i]);
    std::sort(pts.begin(), pts.end());
    if (pts.size() < 4) return std::max(1.0, std::abs(m.freq_khz.back()) / 10);
    const double peak = pts.front().second;
    std::vector<double> tail;
    for (size_t i = pts.size() * 3 / 4; i < pts.size(); ++i) tail.push_back(pts[i].second);
    std::sort(tail.begin(), tail.end());
    const double bg = tail[tail.size() / 2];
    const double target = bg + 0.5 * (peak - bg);
    if (!(peak > bg)) return std::max(pts.back().first / 10, 1e-6);
    for (const auto& [w, v] : pts)
        if (v <= target && w > 0) return w;
    return pts.back().first / 2;
}

} // namespace

FitResult fit(const SpectraSet& measured, const FitConfig& cfg) {
    cfg.validate();
    Objective obj(measured, cfg);

    std::vector<std::array<double, 2>> starts = cfg.initial_guesses;
    if (starts.empty()) {
        const double g = lorentzian_halfwidth_seed(measured);
        for (double fa : {0.1, 1.0, 10.0})
            for (double fb : {0.1, 1.0, 10.0}) starts.push_back({0.5 * g * fa, 0.5 * g * fb});
    }

    FitResult out;
    out.n_points_used = obj.points_used();
    out.n_points_excluded = obj.points_excluded();
    double best = std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < starts.size(); ++s) {
        std::vector<double> x0 = {std::log(starts[s][0]), std::log(starts[s][1]),
                                  std::log(cfg.gamma_det_fixed)};
        auto f = [&](const std::vector<double>& x) {
            return obj(std::exp(x[0]), std::exp(x[1]), std::exp(x[2]));
        };
        SimplexResult r = nelder_mead(x0, 0.5, f, cfg.simplex_tol, cfg.max_evals);
        FitResult::Start st{std::exp(r.x[0]), std::exp(r.x[1]), std::exp(r.x[2]), r.fmin,
                            r.evaluations, r.converged};
        out.starts.push_back(st);
        out.evaluations += r.evaluations;
        if (r.fmin < best) {
            best = r.fmin;
            out.best_start = static_cast<int>(s);
            out.gamma_in = st.gamma_in;
            out.gamma_out = st.gamma_out;
            out.beta_sq = st.beta_sq;
            out.objective = r.fmin;
            out.converged = r.converged;
        }
    }
    if (out.best_start < 0) throw std::runtime_error("all fit starts failed");
    out.budget_exhausted = !out.converged;
    out.gamma_ph = gamma_ph_matching_rate(obj.click_rate_khz(), out.gamma_in, out.gamma_out,
                                          cfg.gamma_det_fixed);
    return out;
}

FitResult subset_errors(const ClickRecord& clicks, double alpha, const EstimationConfig& est_cfg,
                        const FitConfig& cfg) {
    cfg.validate();
    if (!(alpha > 0) || !(alpha < 1))
        throw ConfigError("subset errors need alpha in (0, 1) so that thinnings differ");

    FitResult agg;
    std::vector<FitResult> fits;
    int failures = 0;
    for (int i = 0; i < cfg.n_subsets; ++i) {
        FitResult::Subset sub;
        sub.seed = mix_seed(cfg.seed, stream::kSubset, static_cast<uint64_t>(i));
        sub.alpha = alpha;
        try {
            ClickRecord thinned = thin(clicks, alpha, sub.seed);
            EstimationConfig ec = est_cfg;
            ec.seed = sub.seed;
            SpectraSet spectra = estimate_spectra(thinned, ec);
            FitResult r = fit(spectra, cfg);
            sub.gamma_in = r.gamma_in;
            sub.gamma_out = r.gamma_out;
            sub.beta_sq = r.beta_sq;
            sub.gamma_ph = r.gamma_ph;
            sub.objective = r.objective;
            sub.converged = r.converged;
            fits.push_back(r);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "warning: subset %d failed: %s\n", i, e.what());
            sub.failed = true;
            ++failures;
            if (failures > 2) throw std::runtime_error("more than two subset fits failed");
        }
        agg.subsets.push_back(sub);
    }
    if (fits.empty()) throw std::runtime_error("all subset fits failed");

    auto stats = [&](auto getter, double& mean, double& sigma) {
        mean = 0;
        for (const auto& f : fits) mean += getter(f);
        mean /= fits.size();
        if (fits.size() < 2) {
            sigma = std::nan("");
            return;
        }
        double ss = 0;
        for (const auto& f : fits) {
            const double d = getter(f) - mean;
            ss += d * d;
        }
        sigma = std::sqrt(ss / (fits.size() - 1.0));
    };
    stats([](const FitResult& f) { return f.gamma_in; }, agg.gamma_in, agg.gamma_in_sigma);
    stats([](const FitResult& f) { return f.gamma_out; }, agg.gamma_out, agg.gamma_out_sigma);
    stats([](const FitResult& f) { return f.beta_sq; }, agg.beta_sq, agg.beta_sq_sigma);
    stats([](const FitResult& f) { return f.gamma_ph; }, agg.gamma_ph, agg.gamma_ph_sigma);
    agg.has_sigma = fits.size() >= 2;
    agg.converged = true;
    for (const auto& f : fits) agg.converged = agg.converged && f.converged;
    agg.objective = fits.front().objective;
    agg.n_points_used = fits.front().n_points_used;
    return agg;
}

} // namespace pspec
