#include "pspec/spectra_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace pspec {

FrequencyGrid FrequencyGrid::linspace(double lo, double hi, int n) {
    if (n < 2 || !(hi > lo)) throw std::invalid_argument("bad grid range");
    FrequencyGrid g;
    g.values.resize(n);
    for (int i = 0; i < n; ++i) g.values[i] = lo + (hi - lo) * i / (n - 1);
    return g;
}

void FrequencyGrid::validate() const {
    for (size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw std::invalid_argument("grid value not finite");
        if (i > 0 && !(values[i] > values[i - 1]))
            throw std::invalid_argument("grid must be strictly ascending");
    }
}

FrequencyGrid default_grid(double rate_scale_khz, int n, double span_multiple) {
    double w = span_multiple * rate_scale_khz;
    return FrequencyGrid::linspace(-w, w, n);
}

EigenSpectra EigenSpectra::build(const LindbladSystem& sys, const DensityMatrix& rho0,
                                 const SpectralDecomposition& decomp) {
    auto [calA, calAp] = measurement_superops(sys, rho0);
    const int n2 = decomp.dim();
    const int n = sys.dim;

    CVec tr_vec = vectorize(CMat::Identity(n, n));
    // Full-space quantities, zero mode removed afterwards.
    Eigen::RowVectorXcd t_full = tr_vec.transpose() * calAp.m * decomp.right;
    CVec b_full = decomp.left * (calAp.m * vectorize(rho0.rho));
    CMat M_full = decomp.left * calAp.m * decomp.right;

    std::vector<int> nonzero;
    nonzero.reserve(n2 - 1);
    for (int i = 0; i < n2; ++i)
        if (i != decomp.zero_index) nonzero.push_back(i);

    // Prune modes that cannot appear in any chain t . (M .)^k b: a mode
    // participates only if it is reachable from b and co-reachable to t
    // within the at-most-two M hops the fourth-order chain allows.
    const int P = static_cast<int>(nonzero.size());
    double scale_t = 0, scale_b = 0, scale_M = 0;
    for (int i : nonzero) scale_t = std::max(scale_t, std::abs(t_full(i)));
    for (int i : nonzero) scale_b = std::max(scale_b, std::abs(b_full(i)));
    for (int i : nonzero)
        for (int j : nonzero) scale_M = std::max(scale_M, std::abs(M_full(i, j)));
    const double eps = 1e-12;
    std::vector<char> from_b(P, 0), to_t(P, 0);
    for (int a = 0; a < P; ++a) {
        from_b[a] = std::abs(b_full(nonzero[a])) > eps * std::max(scale_b, 1e-300);
        to_t[a] = std::abs(t_full(nonzero[a])) > eps * std::max(scale_t, 1e-300);
    }
    for (int hop = 0; hop < 2; ++hop) {
        std::vector<char> fb = from_b, tt = to_t;
        for (int a = 0; a < P; ++a)
            for (int c = 0; c < P; ++c) {
                double mac = std::abs(M_full(nonzero[a], nonzero[c]));
                if (mac > eps * std::max(scale_M, 1e-300)) {
                    if (from_b[c]) fb[a] = 1;
                    if (to_t[a]) tt[c] = 1;
                }
            }
        from_b = fb;
        to_t = tt;
    }
    std::vector<int> kept;
    for (int a = 0; a < P; ++a)
        if (from_b[a] && to_t[a]) kept.push_back(nonzero[a]);
    if (kept.empty()) kept = nonzero; // trivially zero spectra; keep shape

    EigenSpectra es;
    const int K = static_cast<int>(kept.size());
    es.lambda.resize(K);
    es.t.resize(K);
    es.b.resize(K);
    es.M.resize(K, K);
    for (int a = 0; a < K; ++a) {
        es.lambda(a) = decomp.eigenvalues(kept[a]);
        es.t(a) = t_full(kept[a]);
        es.b(a) = b_full(kept[a]);
        for (int c = 0; c < K; ++c) es.M(a, c) = M_full(kept[a], kept[c]);
    }
    es.a_mean = calA.apply(rho0.rho).trace().real();
    es.beta_sq = sys.beta_sq;
    return es;
}

EigenSpectra EigenSpectra::build(const LindbladSystem& sys) {
    Superoperator Lp = sys.liouvillian_measured();
    const bool diag = sys.markov_diagonal();
    DensityMatrix rho0 = steady_state(Lp, diag);
    return build(sys, rho0, decompose(Lp));
}

Superoperator resolvent(const SpectralDecomposition& decomp, double omega) {
    const int n2 = decomp.dim();
    CMat m = CMat::Zero(n2, n2);
    for (int i = 0; i < n2; ++i) {
        if (i == decomp.zero_index) continue;
        Complex g = -1.0 / (decomp.eigenvalues(i) + Complex(0.0, omega));
        m.noalias() += g * (decomp.right.col(i) * decomp.left.row(i));
    }
    return Superoperator{std::move(m)};
}

namespace {

// g_i(omega) vectors for the handful of distinct frequencies per grid
// point. Backed by a deque so handed-out references stay valid.
class ResolventCache {
  public:
    explicit ResolventCache(const CVec& lambda) : lambda_(lambda) {}

    const CVec& get(double w) {
        for (auto& e : entries_)
            if (e.first == w) return e.second;
        CVec g(lambda_.size());
        for (int i = 0; i < lambda_.size(); ++i) g(i) = -1.0 / (lambda_(i) + Complex(0.0, w));
        entries_.emplace_back(w, std::move(g));
        return entries_.back().second;
    }

  private:
    const CVec& lambda_;
    std::deque<std::pair<double, CVec>> entries_;
};

// 1/(lambda_i + lambda_j + i c) matrices, cached per distinct c.
class PairDenomCache {
  public:
    explicit PairDenomCache(const CVec& lambda) : lambda_(lambda) {}

    const CMat& get(double c) {
        for (auto& e : entries_)
            if (e.first == c) return e.second;
        const int K = static_cast<int>(lambda_.size());
        CMat d(K, K);
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j)
                d(i, j) = 1.0 / (lambda_(i) + lambda_(j) + Complex(0.0, c));
        entries_.emplace_back(c, std::move(d));
        return entries_.back().second;
    }

  private:
    const CVec& lambda_;
    std::deque<std::pair<double, CMat>> entries_;
};

// Ordered (l, m) index pairs realizing the six permutations of {0,1,2}.
constexpr std::array<std::array<int, 2>, 6> kPerm3 = {{
    {1, 2}, {2, 1}, {0, 2}, {2, 0}, {0, 1}, {1, 0},
}};

// Ordered (l, m, n) triples of distinct indices from {0,1,2,3}; the 24
// permutations of the fourth-order sum (k is the remaining index).
std::array<std::array<int, 3>, 24> make_perm4() {
    std::array<std::array<int, 3>, 24> out{};
    int q = 0;
    for (int l = 0; l < 4; ++l)
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n)
                if (l != m && l != n && m != n) out[q++] = {l, m, n};
    return out;
}
const std::array<std::array<int, 3>, 24> kPerm4 = make_perm4();

} // namespace

double s1(const EigenSpectra& es) { return es.beta_sq * es.a_mean; }

double s2_point(const EigenSpectra& es, double omega, bool include_shot_noise) {
    Complex acc = 0;
    for (int i = 0; i < es.modes(); ++i) {
        Complex gp = -1.0 / (es.lambda(i) + Complex(0.0, omega));
        Complex gm = -1.0 / (es.lambda(i) - Complex(0.0, omega));
        acc += es.t(i) * (gp + gm) * es.b(i);
    }
    double beta4 = es.beta_sq * es.beta_sq;
    double val = beta4 * acc.real();
    double imag = beta4 * std::abs(acc.imag());
    if (imag > 1e-8 * std::max(std::abs(val), 1e-300) && imag > 1e-13)
        throw std::runtime_error("s2 has a non-negligible imaginary part");
    if (include_shot_noise) val += es.beta_sq / 4.0;
    return val;
}

Complex s3_point(const EigenSpectra& es, double w1, double w2) {
    const double w[3] = {w1, w2, -w1 - w2};
    ResolventCache cache(es.lambda);
    Complex acc = 0;
    CVec tmp(es.modes()), tmp2(es.modes());
    for (const auto& p : kPerm3) {
        const double wl = w[p[0]], wm = w[p[1]];
        const CVec& g2 = cache.get(wm + wl);
        const CVec& g1 = cache.get(wm);
        tmp.array() = g2.array() * es.b.array();
        tmp2.noalias() = es.M * tmp;
        acc += (es.t.array() * g1.array() * tmp2.array()).sum();
    }
    double beta6 = es.beta_sq * es.beta_sq * es.beta_sq;
    return beta6 * acc;
}

static Complex s4_accumulate(const EigenSpectra& es, double w1, double w2,
                             bool chain_term, bool integral_terms) {
    const double w[4] = {w1, w2, -w1, -w2};
    ResolventCache rcache(es.lambda);
    PairDenomCache dcache(es.lambda);
    const int K = es.modes();
    CVec tb = es.t.array() * es.b.array();
    CVec v1(K), v2(K), v3(K), v4(K), x(K), y(K);
    Complex acc = 0;
    for (const auto& p : kPerm4) {
        const double f1 = w[p[2]];                    // omega_n
        const double f2 = w[p[1]] + w[p[2]];          // omega_m + omega_n
        const double f3 = w[p[0]] + w[p[1]] + w[p[2]];// omega_l + omega_m + omega_n
        const CVec& g1 = rcache.get(f1);
        const CVec& g2 = rcache.get(f2);
        const CVec& g3 = rcache.get(f3);
        if (chain_term) {
            v1.array() = g3.array() * es.b.array();
            v2.noalias() = es.M * v1;
            v3.array() = g2.array() * v2.array();
            v4.noalias() = es.M * v3;
            acc += (es.t.array() * g1.array() * v4.array()).sum();
        }
        if (integral_terms) {
            const CMat& D = dcache.get(f2);
            x.array() = tb.array() * g1.array();
            y.array() = tb.array() * g3.array();
            // I1 = -x^T D y ; I2 = -(x o g3)^T D tb
            v2.noalias() = D * y;
            Complex i1 = -(x.array() * v2.array()).sum();
            v1.array() = x.array() * g3.array();
            v2.noalias() = D * tb;
            Complex i2 = -(v1.array() * v2.array()).sum();
            acc -= i1 + i2;
        }
    }
    return acc;
}

double s4_point(const EigenSpectra& es, double w1, double w2) {
    Complex acc = s4_accumulate(es, w1, w2, true, true);
    double beta8 = es.beta_sq * es.beta_sq;
    beta8 *= beta8;
    double val = beta8 * acc.real();
    double imag = beta8 * std::abs(acc.imag());
    if (imag > 1e-8 * std::max(std::abs(val), 1e-300) && imag > 1e-12)
        throw std::runtime_error("s4 cut has a non-negligible imaginary part");
    return val;
}

Complex s4_integral_terms(const EigenSpectra& es, double w1, double w2) {
    // Returned without the beta^8 prefactor and with the sign as it enters
    // the bracket (i.e. the value of -sum(I1 + I2)).
    return s4_accumulate(es, w1, w2, false, true);
}

static ModelSpectra evaluate_impl(const LindbladSystem& sys, const FrequencyGrid& grid,
                                  const ModelSpectraOptions& opts) {
    grid.validate();
    EigenSpectra es = EigenSpectra::build(sys);
    const int n = grid.size();
    ModelSpectra out;
    out.grid = grid;
    out.shot_noise_included = opts.include_shot_noise;
    if (opts.orders[0]) out.s1 = s1(es);
    if (opts.orders[1]) {
        out.s2.resize(n);
#pragma omp parallel for schedule(static) if (opts.parallel)
        for (int i = 0; i < n; ++i)
            out.s2[i] = s2_point(es, grid.values[i], opts.include_shot_noise);
    }
    if (opts.orders[2]) {
        out.s3.resize(n, n);
#pragma omp parallel for schedule(static) if (opts.parallel)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out.s3(i, j) = s3_point(es, grid.values[i], grid.values[j]);
    }
    if (opts.orders[3]) {
        out.s4.resize(n, n);
#pragma omp parallel for schedule(static) if (opts.parallel)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out.s4(i, j) = s4_point(es, grid.values[i], grid.values[j]);
    }
    return out;
}

ModelSpectra evaluate_model_spectra(const LindbladSystem& sys, const FrequencyGrid& grid,
                                    const ModelSpectraOptions& opts) {
    return evaluate_impl(sys, grid, opts);
}

ModelSpectra evaluate_model_spectra_serial(const LindbladSystem& sys, const FrequencyGrid& grid,
                                           ModelSpectraOptions opts) {
    opts.parallel = false;
    return evaluate_impl(sys, grid, opts);
}

} // namespace pspec
