#include "pspec/estimator.hpp"

#include <fftw3.h>
#include <omp.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "pspec/errors.hpp"
#include "pspec/kstat.hpp"
#include "pspec/rng.hpp"

namespace pspec {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

FramePlan plan_frames(const EstimationConfig& cfg, double duration_ms) {
    if (cfg.frame_length_ms <= 0) throw ConfigError("frame_length must be positive");
    if (cfg.frame_length_ms > duration_ms) throw ConfigError("frame_length exceeds record duration");
    if (cfg.n_freq < 2) throw ConfigError("n_freq must be at least 2");
    if (cfg.resampling_count < 1) throw ConfigError("resampling_count must be >= 1");
    if (cfg.batch_count < 2) throw ConfigError("batch_count must be >= 2");

    FramePlan plan;
    plan.frame_length_ms = cfg.frame_length_ms;
    plan.n_frames = static_cast<int>(std::floor(duration_ms / cfg.frame_length_ms));
    plan.comb_khz = kTwoPi / cfg.frame_length_ms;

    const int half = cfg.n_freq / 2;
    if (cfg.max_freq_khz > 0) {
        double spacing = cfg.max_freq_khz / half;
        plan.stride = static_cast<int>(std::lround(spacing / plan.comb_khz));
        if (plan.stride < 1)
            throw ConfigError(
                "max_freq/n_freq asks for a grid finer than the frame comb 2*pi/T; "
                "increase frame_length or max_freq");
    } else {
        plan.stride = 1;
    }
    plan.axis_j.resize(cfg.n_freq);
    for (int i = 0; i < cfg.n_freq; ++i) plan.axis_j[i] = i - half;

    const bool need3 = cfg.orders[2];
    plan.coeff_count = (need3 ? 2 * half : half) + 1;

    if (plan.n_frames < cfg.batch_count)
        throw InsufficientData("record is shorter than batch_count frames; cannot form error estimates");
    int min_per_batch = cfg.orders[3] ? 4 : (cfg.orders[2] ? 3 : 2);
    int m_min = plan.n_frames / cfg.batch_count; // smallest contiguous batch
    if (m_min < min_per_batch)
        throw InsufficientData("too few frames per batch for the requested cumulant orders");
    return plan;
}

std::vector<std::vector<double>> segment_clicks(const ClickRecord& clicks, double frame_length_ms,
                                                int min_frames) {
    if (frame_length_ms <= 0 || frame_length_ms > clicks.duration_ms)
        throw ConfigError("frame length must lie in (0, duration]");
    const int F = static_cast<int>(std::floor(clicks.duration_ms / frame_length_ms));
    if (F < min_frames) throw InsufficientData("fewer frames than required");
    std::vector<std::vector<double>> frames(F);
    for (double t : clicks.t_ms) {
        const int f = static_cast<int>(std::floor(t / frame_length_ms));
        if (f >= F) continue; // trailing remainder dropped
        frames[f].push_back(t - f * frame_length_ms);
    }
    return frames;
}

Eigen::VectorXcd click_fourier(const std::vector<double>& t_rel_ms,
                               const std::vector<double>& weights, WindowKind window,
                               double sigma_rel, double frame_length_ms,
                               const std::vector<int>& k) {
    if (t_rel_ms.size() != weights.size())
        throw std::invalid_argument("weights must match clicks");
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(k.size());
    for (size_t j = 0; j < t_rel_ms.size(); ++j) {
        const double t = t_rel_ms[j];
        const double gb = window_value(window, t, frame_length_ms, sigma_rel) * weights[j];
        for (size_t q = 0; q < k.size(); ++q) {
            const double phi = kTwoPi * k[q] * t / frame_length_ms;
            a(q) += gb * Complex(std::cos(phi), std::sin(phi));
        }
    }
    return a;
}

Eigen::VectorXcd sampled_fourier(const std::vector<double>& z_frame, WindowKind window,
                                 double sigma_rel, double frame_length_ms,
                                 const std::vector<int>& k) {
    const int N = static_cast<int>(z_frame.size());
    if (N < 1) throw std::invalid_argument("empty frame");
    std::vector<fftw_complex> in(N), out(N);
    for (int j = 0; j < N; ++j) {
        const double t = (j + 0.5) * frame_length_ms / N;
        in[j][0] = window_value(window, t, frame_length_ms, sigma_rel) * z_frame[j];
        in[j][1] = 0.0;
    }
    fftw_plan plan = fftw_plan_dft_1d(N, in.data(), out.data(), FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    Eigen::VectorXcd a(k.size());
    const double scale = frame_length_ms / N;
    for (size_t q = 0; q < k.size(); ++q) {
        int kk = k[q] % N;
        if (kk < 0) kk += N;
        // The DFT references sample j to t = jT/N while the bin value sits at
        // t = (j+1/2)T/N; shift the phase accordingly.
        const double phi = kTwoPi * k[q] * 0.5 / N;
        a(q) = scale * Complex(out[kk][0], out[kk][1]) * Complex(std::cos(phi), std::sin(phi));
    }
    return a;
}

std::vector<uint8_t> thin_mask(size_t n, double alpha, uint64_t seed) {
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("alpha must lie in (0, 1]");
    std::vector<uint8_t> keep(n, 1);
    if (alpha == 1.0) return keep;
    Xoshiro256StarStar rng(mix_seed(seed, stream::kThin));
    for (size_t i = 0; i < n; ++i) keep[i] = rng.bernoulli(alpha) ? 1 : 0;
    return keep;
}

ClickRecord thin(const ClickRecord& clicks, double alpha, uint64_t seed) {
    std::vector<uint8_t> keep = thin_mask(clicks.size(), alpha, seed);
    ClickRecord out;
    out.duration_ms = clicks.duration_ms;
    out.t_ms.reserve(static_cast<size_t>(clicks.size() * alpha * 1.1) + 16);
    for (size_t i = 0; i < clicks.size(); ++i)
        if (keep[i]) out.t_ms.push_back(clicks.t_ms[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Accumulation core shared by the click and sampled paths.

namespace {

struct S3SlotPlan {
    int ix, iy, iz;
    bool cx, cy, cz;
};

struct AccLayout {
    int M = 0;
    int n3 = 0, n4 = 0;
    int off_meanP = 0, off_s3 = 0, off_s4 = 0;
    int block = 0;

    AccLayout() = default;
    AccLayout(int coeff_count, int n3_, int n4_) : M(coeff_count), n3(n3_), n4(n4_) {
        off_meanP = 2 * M;
        off_s3 = 3 * M;
        off_s4 = off_s3 + 8 * n3;
        block = off_s4 + 9 * n4;
    }
};

inline Complex coef_mean(const double* blk, double inv_m, int k) {
    const int a = k >= 0 ? k : -k;
    Complex v(blk[2 * a] * inv_m, blk[2 * a + 1] * inv_m);
    return k >= 0 ? v : std::conj(v);
}

void accumulate_frame(double* blk, const AccLayout& lay, const std::vector<S3SlotPlan>& s3plan,
                      const std::vector<GridIndexing::Pair>& s4slots, const Complex* A,
                      const double* absA2) {
    for (int u = 0; u < lay.M; ++u) {
        blk[2 * u] += A[u].real();
        blk[2 * u + 1] += A[u].imag();
        blk[lay.off_meanP + u] += absA2[u];
    }
    double* b3 = blk + lay.off_s3;
    for (const auto& s : s3plan) {
        const Complex x = s.cx ? std::conj(A[s.ix]) : A[s.ix];
        const Complex y = s.cy ? std::conj(A[s.iy]) : A[s.iy];
        const Complex z = s.cz ? std::conj(A[s.iz]) : A[s.iz];
        const Complex xy = x * y, xz = x * z, yz = y * z, xyz = xy * z;
        b3[0] += xyz.real();
        b3[1] += xyz.imag();
        b3[2] += xy.real();
        b3[3] += xy.imag();
        b3[4] += xz.real();
        b3[5] += xz.imag();
        b3[6] += yz.real();
        b3[7] += yz.imag();
        b3 += 8;
    }
    double* b4 = blk + lay.off_s4;
    for (const auto& s : s4slots) {
        const Complex x = A[s.p], y = A[s.q];
        const double pu = absA2[s.p], pv = absA2[s.q];
        const Complex xy = x * y, xyb = x * std::conj(y);
        b4[0] += xy.real();
        b4[1] += xy.imag();
        b4[2] += xyb.real();
        b4[3] += xyb.imag();
        b4[4] += pu * y.real();
        b4[5] += pu * y.imag();
        b4[6] += pv * x.real();
        b4[7] += pv * x.imag();
        b4[8] += pu * pv;
        b4 += 9;
    }
}

struct SlotValues {
    double s1 = 0;
    std::vector<double> s2;
    std::vector<Complex> s3;
    std::vector<double> s4;
};

SlotValues slot_kstats(const double* blk, const AccLayout& lay, const GridIndexing& idx,
                       double m, double T, const WindowNorms& w, const bool orders[4]) {
    SlotValues out;
    const double inv_m = 1.0 / m;
    if (orders[0]) out.s1 = blk[0] * inv_m / (T * w.w1);
    if (orders[1]) {
        out.s2.resize(idx.s2_unique.size());
        for (size_t s = 0; s < idx.s2_unique.size(); ++s) {
            const int u = idx.s2_unique[s];
            const Complex ma = coef_mean(blk, inv_m, u);
            const double mp = blk[lay.off_meanP + u] * inv_m;
            out.s2[s] = m / (m - 1.0) * (mp - std::norm(ma)) / (T * w.w2);
        }
    }
    if (orders[2]) {
        out.s3.resize(idx.s3_unique.size());
        const double* b3 = blk + lay.off_s3;
        for (size_t s = 0; s < idx.s3_unique.size(); ++s, b3 += 8) {
            const auto& pq = idx.s3_unique[s];
            const Complex mx = coef_mean(blk, inv_m, pq.p);
            const Complex my = coef_mean(blk, inv_m, pq.q);
            const Complex mz = coef_mean(blk, inv_m, -pq.p - pq.q);
            const Complex mxyz(b3[0] * inv_m, b3[1] * inv_m);
            const Complex mxy(b3[2] * inv_m, b3[3] * inv_m);
            const Complex mxz(b3[4] * inv_m, b3[5] * inv_m);
            const Complex myz(b3[6] * inv_m, b3[7] * inv_m);
            out.s3[s] = kstat::c3(m, mx, my, mz, mxy, mxz, myz, mxyz) / (T * w.w3);
        }
    }
    if (orders[3]) {
        out.s4.resize(idx.s4_unique.size());
        const double* b4 = blk + lay.off_s4;
        for (size_t s = 0; s < idx.s4_unique.size(); ++s, b4 += 9) {
            const auto& uv = idx.s4_unique[s];
            kstat::RawMeans4 r;
            r.x = coef_mean(blk, inv_m, uv.p);
            r.y = coef_mean(blk, inv_m, uv.q);
            r.z = std::conj(r.x);
            r.w = std::conj(r.y);
            r.xy = Complex(b4[0] * inv_m, b4[1] * inv_m);
            r.xw = Complex(b4[2] * inv_m, b4[3] * inv_m);
            r.xz = blk[lay.off_meanP + uv.p] * inv_m;
            r.yw = blk[lay.off_meanP + uv.q] * inv_m;
            r.yz = std::conj(r.xw);
            r.zw = std::conj(r.xy);
            r.xyz = Complex(b4[4] * inv_m, b4[5] * inv_m);
            r.xyw = Complex(b4[6] * inv_m, b4[7] * inv_m);
            r.xzw = std::conj(r.xyz);
            r.yzw = std::conj(r.xyw);
            r.xyzw = b4[8] * inv_m;
            out.s4[s] = kstat::c4(m, r).real() / (T * w.w4);
        }
    }
    return out;
}

/// Drives the whole estimation: the frame source fills per-frame coefficient
/// matrices (coeff_count x R, split into real and imaginary parts) for a
/// window of frames; accumulation and statistics are common.
class EstimatorDriver {
  public:
    EstimatorDriver(const EstimationConfig& cfg, const FramePlan& plan, int R)
        : cfg_(cfg),
          plan_(plan),
          R_(R),
          idx_(GridIndexing::build(plan.axis_j)),
          lay_(plan.coeff_count, cfg.orders[2] ? static_cast<int>(idx_.s3_unique.size()) : 0,
               cfg.orders[3] ? static_cast<int>(idx_.s4_unique.size()) : 0),
          norms_(window_norms(cfg.window, cfg.window_sigma_rel)) {
        build_s3_plan();
        global_.assign(static_cast<size_t>(R_) * lay_.block, 0.0);
        batch_.assign(static_cast<size_t>(R_) * lay_.block, 0.0);
        batch_values_.resize(cfg.batch_count);
    }

    const GridIndexing& indexing() const { return idx_; }
    const WindowNorms& norms() const { return norms_; }

    /// fill(frame, are, aim): write the frame's coefficients; the matrices
    /// arrive zeroed with shape (coeff_count x R).
    using FillFn = std::function<void(int, Eigen::MatrixXd&, Eigen::MatrixXd&)>;

    void run(const FillFn& fill, bool parallel) {
        const int B = cfg_.batch_count;
        const int F = plan_.n_frames;
        const int W = std::max(1, std::min(F, window_frames()));
        std::vector<Eigen::MatrixXd> are(W), aim(W);
        for (int i = 0; i < W; ++i) {
            are[i].setZero(lay_.M, R_);
            aim[i].setZero(lay_.M, R_);
        }
        int batch_start = 0;
        for (int b = 0; b < B; ++b) {
            const int batch_end = static_cast<int>((static_cast<int64_t>(b + 1) * F) / B);
            for (int w0 = batch_start; w0 < batch_end; w0 += W) {
                const int w1 = std::min(w0 + W, batch_end);
#pragma omp parallel for schedule(dynamic) if (parallel)
                for (int f = w0; f < w1; ++f) {
                    are[f - w0].setZero();
                    aim[f - w0].setZero();
                    fill(f, are[f - w0], aim[f - w0]);
                }
#pragma omp parallel for schedule(static) if (parallel)
                for (int r = 0; r < R_; ++r) {
                    std::vector<Complex> A(lay_.M);
                    std::vector<double> absA2(lay_.M);
                    double* blk = batch_.data() + static_cast<size_t>(r) * lay_.block;
                    for (int f = w0; f < w1; ++f) {
                        const auto& re = are[f - w0];
                        const auto& im = aim[f - w0];
                        for (int u = 0; u < lay_.M; ++u) {
                            A[u] = Complex(re(u, r), im(u, r));
                            absA2[u] = std::norm(A[u]);
                        }
                        accumulate_frame(blk, lay_, s3plan_, s4slots_, A.data(), absA2.data());
                    }
                }
            }
            finish_batch(b, batch_end - batch_start);
            batch_start = batch_end;
        }
    }

    SpectraSet finalize() const {
        SpectraSet out;
        out.axis_j = plan_.axis_j;
        out.stride = plan_.stride;
        out.comb_khz = plan_.comb_khz;
        out.freq_khz.resize(plan_.axis_j.size());
        for (size_t i = 0; i < plan_.axis_j.size(); ++i)
            out.freq_khz[i] = plan_.freq_of(plan_.axis_j[i]);
        out.config = cfg_;
        out.norms = norms_;
        out.n_frames = plan_.n_frames;

        const double T = plan_.frame_length_ms;
        SlotValues center = average_over_r(global_.data(), plan_.n_frames, T);

        // Batch scatter -> standard error of the mean.
        const int B = cfg_.batch_count;
        auto sigma_of = [&](auto getter) {
            double mean = 0;
            for (int b = 0; b < B; ++b) mean += getter(batch_values_[b]);
            mean /= B;
            double ss = 0;
            for (int b = 0; b < B; ++b) {
                double d = getter(batch_values_[b]) - mean;
                ss += d * d;
            }
            return std::sqrt(ss / (B - 1.0)) / std::sqrt(static_cast<double>(B));
        };

        const int n = idx_.n();
        if (cfg_.orders[0]) {
            out.s1 = center.s1;
            out.s1_sigma = sigma_of([](const SlotValues& v) { return v.s1; });
        }
        if (cfg_.orders[1]) {
            out.s2.resize(n);
            out.s2_sigma.resize(n);
            std::vector<double> slot_sigma(idx_.s2_unique.size());
            for (size_t s = 0; s < idx_.s2_unique.size(); ++s)
                slot_sigma[s] = sigma_of([s](const SlotValues& v) { return v.s2[s]; });
            for (int i = 0; i < n; ++i) {
                out.s2[i] = center.s2[idx_.s2_slot[i]];
                out.s2_sigma[i] = slot_sigma[idx_.s2_slot[i]];
            }
        }
        if (cfg_.orders[2]) {
            out.s3.resize(n, n);
            out.s3_sigma_re.resize(n, n);
            out.s3_sigma_im.resize(n, n);
            std::vector<double> sig_re(idx_.s3_unique.size()), sig_im(idx_.s3_unique.size());
            for (size_t s = 0; s < idx_.s3_unique.size(); ++s) {
                sig_re[s] = sigma_of([s](const SlotValues& v) { return v.s3[s].real(); });
                sig_im[s] = sigma_of([s](const SlotValues& v) { return v.s3[s].imag(); });
            }
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const int c = idx_.cell(i, j);
                    const int s = idx_.s3_slot[c];
                    Complex v = center.s3[s];
                    out.s3(i, j) = idx_.s3_conj[c] ? std::conj(v) : v;
                    out.s3_sigma_re(i, j) = sig_re[s];
                    out.s3_sigma_im(i, j) = sig_im[s];
                }
            }
        }
        if (cfg_.orders[3]) {
            out.s4.resize(n, n);
            out.s4_sigma.resize(n, n);
            std::vector<double> sig(idx_.s4_unique.size());
            for (size_t s = 0; s < idx_.s4_unique.size(); ++s)
                sig[s] = sigma_of([s](const SlotValues& v) { return v.s4[s]; });
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const int s = idx_.s4_slot[idx_.cell(i, j)];
                    out.s4(i, j) = center.s4[s];
                    out.s4_sigma(i, j) = sig[s];
                }
            }
        }
        return out;
    }

    int coeff_count() const { return lay_.M; }

  private:
    int window_frames() const {
        // ~50 MB of coefficient buffer.
        const size_t per_frame = static_cast<size_t>(lay_.M) * R_ * 2 * sizeof(double);
        return static_cast<int>(std::max<size_t>(1, (50u << 20) / std::max<size_t>(per_frame, 1)));
    }

    void build_s3_plan() {
        if (cfg_.orders[2]) {
            s3plan_.reserve(idx_.s3_unique.size());
            for (const auto& pq : idx_.s3_unique) {
                S3SlotPlan p;
                const int r3 = -pq.p - pq.q;
                p.ix = std::abs(pq.p);
                p.cx = pq.p < 0;
                p.iy = std::abs(pq.q);
                p.cy = pq.q < 0;
                p.iz = std::abs(r3);
                p.cz = r3 < 0;
                s3plan_.push_back(p);
            }
        }
        if (cfg_.orders[3]) s4slots_ = idx_.s4_unique;
    }

    SlotValues average_over_r(const double* blocks, int m, double T) const {
        SlotValues avg;
        for (int r = 0; r < R_; ++r) {
            SlotValues v = slot_kstats(blocks + static_cast<size_t>(r) * lay_.block, lay_, idx_,
                                       m, T, norms_, cfg_.orders);
            if (r == 0) {
                avg = std::move(v);
            } else {
                avg.s1 += v.s1;
                for (size_t i = 0; i < avg.s2.size(); ++i) avg.s2[i] += v.s2[i];
                for (size_t i = 0; i < avg.s3.size(); ++i) avg.s3[i] += v.s3[i];
                for (size_t i = 0; i < avg.s4.size(); ++i) avg.s4[i] += v.s4[i];
            }
        }
        const double inv = 1.0 / R_;
        avg.s1 *= inv;
        for (auto& x : avg.s2) x *= inv;
        for (auto& x : avg.s3) x *= inv;
        for (auto& x : avg.s4) x *= inv;
        return avg;
    }

    void finish_batch(int b, int m_batch) {
        batch_values_[b] = average_over_r(batch_.data(), m_batch, plan_.frame_length_ms);
        for (size_t i = 0; i < batch_.size(); ++i) {
            global_[i] += batch_[i];
            batch_[i] = 0.0;
        }
    }

    EstimationConfig cfg_;
    FramePlan plan_;
    int R_;
    GridIndexing idx_;
    AccLayout lay_;
    WindowNorms norms_;
    std::vector<S3SlotPlan> s3plan_;
    std::vector<GridIndexing::Pair> s4slots_;
    std::vector<double> global_;
    std::vector<double> batch_;
    std::vector<SlotValues> batch_values_;
};

} // namespace

static SpectraSet estimate_clicks_impl(const ClickRecord& clicks, EstimationConfig cfg) {
    clicks.validate();
    const int R = cfg.unit_weights ? 1 : cfg.resampling_count;
    FramePlan plan = plan_frames(cfg, clicks.duration_ms);
    EstimatorDriver driver(cfg, plan, R);

    // Frame click ranges from the sorted timestamps: frame f holds clicks
    // with floor(t/T) == f (half-open intervals), remainder dropped.
    const double T = plan.frame_length_ms;
    std::vector<size_t> frame_begin(plan.n_frames + 1);
    {
        size_t i = 0;
        for (int f = 0; f <= plan.n_frames; ++f) {
            while (i < clicks.t_ms.size() &&
                   static_cast<int>(std::floor(clicks.t_ms[i] / T)) < f)
                ++i;
            frame_begin[f] = i;
        }
    }

    const double wbase = plan.stride * plan.comb_khz; // rad/ms per coefficient
    const int M = driver.coeff_count();
    const uint64_t seed = cfg.seed;
    const bool unit_w = cfg.unit_weights;
    const WindowKind wk = cfg.window;
    const double srel = cfg.window_sigma_rel;

    struct Workspace {
        Eigen::MatrixXd e_re, e_im, bmat;
    };
    std::vector<Workspace> ws(static_cast<size_t>(std::max(1, omp_get_max_threads())));

    auto fill = [&](int f, Eigen::MatrixXd& are, Eigen::MatrixXd& aim) {
        const size_t i0 = frame_begin[f], i1 = frame_begin[f + 1];
        const int J = static_cast<int>(i1 - i0);
        if (J == 0) return; // empty frame: zero coefficients
        Workspace& w = ws[static_cast<size_t>(omp_get_thread_num())];
        w.e_re.resize(M, J);
        w.e_im.resize(M, J);
        w.bmat.resize(J, R);
        for (int j = 0; j < J; ++j) {
            const double t = clicks.t_ms[i0 + j] - f * T;
            const double g = window_value(wk, t, T, srel);
            const double phi = wbase * t;
            const Complex rot(std::cos(phi), std::sin(phi));
            Complex cur(g, 0.0);
            for (int u = 0; u < M; ++u) {
                w.e_re(u, j) = cur.real();
                w.e_im(u, j) = cur.imag();
                cur *= rot;
            }
        }
        Xoshiro256StarStar rng(mix_seed(seed, stream::kWeights, static_cast<uint64_t>(f)));
        if (unit_w) {
            w.bmat.setOnes();
        } else {
            for (int r = 0; r < R; ++r)
                for (int j = 0; j < J; ++j) w.bmat(j, r) = rng.exponential();
        }
        are.noalias() = w.e_re * w.bmat;
        aim.noalias() = w.e_im * w.bmat;
    };

    driver.run(fill, cfg.parallel);
    SpectraSet out = driver.finalize();
    out.n_clicks = clicks.size();
    out.duration_ms = clicks.duration_ms;
    return out;
}

SpectraSet estimate_spectra(const ClickRecord& clicks, const EstimationConfig& cfg) {
    return estimate_clicks_impl(clicks, cfg);
}

SpectraSet estimate_spectra_serial(const ClickRecord& clicks, EstimationConfig cfg) {
    cfg.parallel = false;
    return estimate_clicks_impl(clicks, cfg);
}

SpectraSet estimate_sampled(const SampledRecord& rec, EstimationConfig cfg) {
    if (rec.dt_ms <= 0) throw ConfigError("dt must be positive");
    cfg.resampling_count = 1;
    cfg.unit_weights = true; // no resampling on sampled traces
    FramePlan plan = plan_frames(cfg, rec.duration_ms());
    EstimatorDriver driver(cfg, plan, 1);

    const int N = static_cast<int>(std::floor(plan.frame_length_ms / rec.dt_ms + 0.5));
    if (std::abs(N * rec.dt_ms - plan.frame_length_ms) > 1e-9 * plan.frame_length_ms)
        throw ConfigError("frame_length must be an integer multiple of dt");
    const int M = driver.coeff_count();
    if ((M - 1) * plan.stride >= N / 2)
        throw ConfigError("sampling too coarse for the requested frequency span");

    // Window coefficients at the bin centers, reused across frames.
    std::vector<double> g(N);
    for (int j = 0; j < N; ++j)
        g[j] = window_value(cfg.window, (j + 0.5) * rec.dt_ms, plan.frame_length_ms,
                            cfg.window_sigma_rel);

    std::vector<fftw_complex> in(N), fout(N);
    fftw_plan fplan = fftw_plan_dft_1d(N, in.data(), fout.data(), FFTW_BACKWARD, FFTW_ESTIMATE);
    const double scale = plan.frame_length_ms / N;

    auto fill = [&](int f, Eigen::MatrixXd& are, Eigen::MatrixXd& aim) {
        const size_t base = static_cast<size_t>(f) * N;
        for (int j = 0; j < N; ++j) {
            in[j][0] = g[j] * rec.z[base + j];
            in[j][1] = 0.0;
        }
        fftw_execute(fplan);
        for (int u = 0; u < M; ++u) {
            const int kk = u * plan.stride;
            const double phi = kTwoPi * kk * 0.5 / N;
            const Complex v = scale * Complex(fout[kk][0], fout[kk][1]) *
                              Complex(std::cos(phi), std::sin(phi));
            are(u, 0) = v.real();
            aim(u, 0) = v.imag();
        }
    };
    driver.run(fill, /*parallel=*/false);
    fftw_destroy_plan(fplan);
    SpectraSet out = driver.finalize();
    out.duration_ms = rec.duration_ms();
    out.sampled_source = true;
    return out;
}

} // namespace pspec
