#include "pspec/model.hpp"

#include <Eigen/Eigenvalues>
#include <limits>
#include <stdexcept>

namespace pspec {

CVec vectorize(const CMat& x) {
    return Eigen::Map<const CVec>(x.data(), x.size());
}

CMat unvectorize(const CVec& v, int n) {
    return Eigen::Map<const CMat>(v.data(), n, n);
}

DensityMatrix DensityMatrix::from_probabilities(const std::vector<double>& p) {
    const int n = static_cast<int>(p.size());
    DensityMatrix d;
    d.rho = CMat::Zero(n, n);
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        if (p[i] < 0) throw std::invalid_argument("negative probability");
        d.rho(i, i) = p[i];
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");
    d.markov_diagonal = true;
    return d;
}

int Superoperator::state_dim() const {
    const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(dim()))));
    return n;
}

CMat Superoperator::apply(const CMat& x) const {
    if (x.rows() != state_dim() || x.cols() != state_dim())
        throw std::invalid_argument("superoperator/state dimension mismatch");
    return unvectorize(m * vectorize(x), state_dim());
}

double Superoperator::trace_annihilation_error() const {
    // Tr[S e_jk] is the sum over the diagonal of column vec(e_jk), i.e.
    // vec(I)^T * m has to vanish for a trace-preserving generator.
    const int n = state_dim();
    CMat eye = CMat::Identity(n, n);
    Eigen::RowVectorXcd tr = vectorize(eye).transpose() * m;
    double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0) return 0;
    return tr.cwiseAbs().maxCoeff() / scale;
}

static CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Superoperator dissipator(const CMat& d) {
    if (d.rows() != d.cols()) throw std::invalid_argument("jump operator must be square");
    const int n = static_cast<int>(d.rows());
    const CMat eye = CMat::Identity(n, n);
    const CMat dd = d.adjoint() * d;
    CMat m = kron(d.conjugate(), d) - 0.5 * kron(eye, dd) - 0.5 * kron(dd.transpose(), eye);
    return Superoperator{std::move(m)};
}

Superoperator LindbladSystem::liouvillian() const {
    if (dim <= 0) throw std::invalid_argument("system dimension not set");
    CMat m = CMat::Zero(dim * dim, dim * dim);
    for (const auto& j : jumps) {
        if (j.rate_khz < 0) throw std::invalid_argument("negative jump rate");
        if (j.op.rows() != dim || j.op.cols() != dim)
            throw std::invalid_argument("jump operator dimension mismatch");
        if (j.op.cwiseAbs().maxCoeff() == 0) throw std::invalid_argument("zero jump operator");
        m += j.rate_khz * dissipator(j.op).m;
    }
    return Superoperator{std::move(m)};
}

Superoperator LindbladSystem::liouvillian_measured() const {
    if (measurement.rows() != dim || measurement.cols() != dim)
        throw std::invalid_argument("measurement operator dimension mismatch");
    Superoperator L = liouvillian();
    L.m += beta_sq * dissipator(measurement).m;
    return L;
}

bool LindbladSystem::markov_diagonal() const {
    // d rho d^+ keeps rho diagonal iff the support of d is permutation-like
    // (at most one nonzero per row and per column, which also makes d^+ d
    // diagonal); A must be diagonal.
    const Complex zero(0.0, 0.0);
    for (const auto& j : jumps) {
        for (int c = 0; c < j.op.cols(); ++c) {
            int nz = 0;
            for (int r = 0; r < j.op.rows(); ++r)
                if (j.op(r, c) != zero) ++nz;
            if (nz > 1) return false;
        }
        for (int r = 0; r < j.op.rows(); ++r) {
            int nz = 0;
            for (int c = 0; c < j.op.cols(); ++c)
                if (j.op(r, c) != zero) ++nz;
            if (nz > 1) return false;
        }
    }
    for (int c = 0; c < measurement.cols(); ++c)
        for (int r = 0; r < measurement.rows(); ++r)
            if (r != c && measurement(r, c) != zero) return false;
    return true;
}

LindbladSystem emitter_system(const EmitterParams& p) {
    if (p.gamma_in < 0 || p.gamma_out < 0 || p.gamma_ph < 0 || p.gamma_det < 0 || p.beta_sq < 0)
        throw std::invalid_argument("emitter rates must be nonnegative");
    const int n = 4;
    auto unit = [&](int r, int c) {
        CMat u = CMat::Zero(n, n);
        u(r, c) = 1.0;
        return u;
    };
    // Electron annihilation a = |3><1| + |4><2|, photon annihilation
    // b = |3><4| + |1><2| (states numbered 1..4, indices 0..3).
    CMat a = unit(2, 0) + unit(3, 1);
    CMat b = unit(2, 3) + unit(0, 1);
    CMat eye = CMat::Identity(n, n);
    CMat emit = (eye - a.adjoint() * a) * b.adjoint(); // equals |4><3|

    LindbladSystem sys;
    sys.dim = n;
    sys.jumps = {
        {a.adjoint(), p.gamma_in},
        {a, p.gamma_out},
        {emit, p.gamma_ph},
        {b, p.gamma_det},
    };
    sys.measurement = unit(1, 1) + unit(3, 3); // A = |2><2| + |4><4|
    sys.beta_sq = p.beta_sq;
    return sys;
}

LindbladSystem telegraph_system(double gamma_in, double gamma_out) {
    if (gamma_in < 0 || gamma_out < 0) throw std::invalid_argument("rates must be nonnegative");
    const int n = 2; // 0 = bright, 1 = dark
    CMat to_dark = CMat::Zero(n, n), to_bright = CMat::Zero(n, n);
    to_dark(1, 0) = 1.0;
    to_bright(0, 1) = 1.0;
    LindbladSystem sys;
    sys.dim = n;
    sys.jumps = {{to_dark, gamma_in}, {to_bright, gamma_out}};
    sys.measurement = CMat::Zero(n, n);
    sys.measurement(0, 0) = 1.0;
    sys.beta_sq = 1.0;
    return sys;
}

DensityMatrix steady_state(const Superoperator& L, bool markov_diagonal) {
    SpectralDecomposition d = decompose(L);
    const int n = L.state_dim();
    // Uniqueness: no second eigenvalue below threshold.
    const double scale = d.eigenvalues.cwiseAbs().maxCoeff();
    int n_zero = 0;
    for (int i = 0; i < d.dim(); ++i)
        if (std::abs(d.eigenvalues(i)) < kZeroEigenvalueTol * scale) ++n_zero;
    if (n_zero != 1)
        throw std::runtime_error("degenerate zero eigenspace: the Markov graph appears disconnected");

    CMat rho = unvectorize(d.right.col(d.zero_index), n);
    rho = Complex(0.5, 0.0) * (rho + rho.adjoint().eval()); // hermitize
    rho /= rho.trace();
    // Clip tiny negative diagonal entries and renormalize.
    double diag_scale = rho.diagonal().cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i) {
        double p = rho(i, i).real();
        if (p < 0) {
            if (p < -1e-10 * diag_scale)
                throw std::runtime_error("steady state has a significantly negative population");
            rho(i, i) = 0.0;
        }
    }
    rho /= rho.trace();
    DensityMatrix out;
    if (markov_diagonal) {
        CVec diag = rho.diagonal();
        rho = CMat(diag.asDiagonal());
    }
    out.rho = std::move(rho);
    out.markov_diagonal = markov_diagonal;
    return out;
}

std::pair<Superoperator, Superoperator> measurement_superops(const LindbladSystem& sys,
                                                             const DensityMatrix& rho0) {
    const int n = sys.dim;
    if (rho0.dim() != n) throw std::invalid_argument("state dimension mismatch");
    const CMat& A = sys.measurement;
    const CMat eye = CMat::Identity(n, n);
    Superoperator calA{0.5 * (kron(eye, A) + kron(A.conjugate(), eye))};
    Complex mean = (calA.apply(rho0.rho)).trace();
    Superoperator calAp{calA.m - mean * CMat::Identity(n * n, n * n)};
    return {std::move(calA), std::move(calAp)};
}

SpectralDecomposition decompose(const Superoperator& L) {
    Eigen::ComplexEigenSolver<CMat> es(L.m, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    SpectralDecomposition d;
    d.eigenvalues = es.eigenvalues();
    d.right = es.eigenvectors();
    d.left = d.right.inverse(); // rows biorthogonal to right columns

    const double norm = L.m.cwiseAbs().maxCoeff();
    double resid = (d.right * d.eigenvalues.asDiagonal() * d.left - L.m).cwiseAbs().maxCoeff();
    d.reconstruction_error = norm > 0 ? resid / norm : resid;
    if (d.reconstruction_error > 1e-7)
        throw std::runtime_error(
            "Liouvillian is near-defective (eigenvector reconstruction residual " +
            std::to_string(d.reconstruction_error) +
            "); perturb the rates slightly to lift the degeneracy");

    const double scale = d.eigenvalues.cwiseAbs().maxCoeff();
    int zi = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d.dim(); ++i) {
        double a = std::abs(d.eigenvalues(i));
        if (a < best) {
            best = a;
            zi = i;
        }
    }
    if (scale > 0 && best > kZeroEigenvalueTol * scale)
        throw std::runtime_error("no zero eigenvalue found: generator is not trace-preserving");
    d.zero_index = zi;
    return d;
}

} // namespace pspec
