#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "pspec/params.hpp"

// N-state Markov systems represented as Lindblad quantum systems with
// diagonal density matrices. Superoperators act on column-vectorized N x N
// matrices: vec(A X B) = (B^T kron A) vec(X).

namespace pspec {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

CVec vectorize(const CMat& x);
CMat unvectorize(const CVec& v, int n);

struct DensityMatrix {
    CMat rho;
    bool markov_diagonal = false;

    int dim() const { return static_cast<int>(rho.rows()); }
    double trace_error() const { return std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag()); }
    double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

    /// Diagonal density matrix from classical probabilities (must sum to 1).
    static DensityMatrix from_probabilities(const std::vector<double>& p);
};

struct JumpTerm {
    CMat op;
    double rate_khz = 0;
};

struct Superoperator {
    CMat m; // (N^2 x N^2)

    int dim() const { return static_cast<int>(m.rows()); }
    int state_dim() const;
    CMat apply(const CMat& x) const;

    /// max_x |Tr[S x]| over a matrix-unit basis, relative to ||S||.
    double trace_annihilation_error() const;
};

struct LindbladSystem {
    int dim = 0;
    std::vector<JumpTerm> jumps;
    CMat measurement; // A
    double beta_sq = 1.0;

    /// Liouvillian of the pure jump dynamics (Eq. of motion generator).
    Superoperator liouvillian() const;
    /// L' = L + beta_sq * D[A]; equals L on diagonal matrices when A is diagonal.
    Superoperator liouvillian_measured() const;
    /// True when every jump operator is a scaled matrix unit and A is diagonal,
    /// i.e. the dynamics maps diagonal matrices to diagonal matrices.
    bool markov_diagonal() const;
};

struct SpectralDecomposition {
    CVec eigenvalues;
    CMat right;   // columns are right eigenvectors
    CMat left;    // rows are left eigenvectors, left * right = I
    int zero_index = -1;
    double reconstruction_error = 0;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
};

/// Lindblad dissipator D[d](rho) = d rho d^+ - (d^+ d rho + rho d^+ d)/2
/// as a superoperator.
Superoperator dissipator(const CMat& d);

/// Four-state blinking emitter system; A = |2><2| + |4><4|.
LindbladSystem emitter_system(const EmitterParams& p);

/// Two-state telegraph system: bright state emits level 1, dark level 0.
/// gamma_in is the exit rate from bright, gamma_out from dark.
LindbladSystem telegraph_system(double gamma_in, double gamma_out);

/// Unique steady state of L: solves L rho0 = 0 with unit trace.
/// Throws if the zero eigenvalue is degenerate (disconnected Markov graph).
DensityMatrix steady_state(const Superoperator& L, bool markov_diagonal = false);

/// Measurement superoperators (cal A, cal A'):
///   A x = (A x + x A^+)/2,  A' x = A x - Tr[A rho0] x.
std::pair<Superoperator, Superoperator> measurement_superops(const LindbladSystem& sys,
                                                             const DensityMatrix& rho0);

/// Biorthogonal eigendecomposition of a Liouvillian. Throws when the matrix
/// is near-defective (reconstruction residual above tolerance); perturbing
/// the rates slightly resolves such accidental degeneracies.
SpectralDecomposition decompose(const Superoperator& L);

/// Relative zero-eigenvalue threshold: |lambda| < tol * max|lambda|.
inline constexpr double kZeroEigenvalueTol = 1e-8;

} // namespace pspec
