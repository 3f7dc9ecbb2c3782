#pragma once

#include <functional>
#include <vector>

#include "splx/complex.hpp"
#include "splx/matrix.hpp"

namespace splx {

/// Orthonormal eigenbasis of a Hodge Laplacian. Eigenvalues ascend and are
/// clamped at zero; each eigenvector's sign is fixed by making its largest
/// magnitude entry positive (ties broken by lowest index), so the basis is
/// deterministic for a given matrix. Degenerate eigenspaces still only fix
/// a subspace; tests compare projectors, not individual columns.
struct SpectralBasis {
    Matrix u;                        // N x N, eigenvectors as columns
    std::vector<double> eigenvalues; // length N
};

SpectralBasis sft_basis(const SparseMatrix& laplacian);

/// Simplicial Fourier transform: coefficients U^T x.
Matrix sft_forward(const SpectralBasis& basis, const Matrix& x);

/// Inverse transform U * coeffs.
Matrix sft_inverse(const SpectralBasis& basis, const Matrix& coeffs);

/// A filter described by its frequency response h(lambda).
struct FilterSpec {
    std::function<double(double)> response;

    static FilterSpec low_pass(double cutoff);
    static FilterSpec high_pass(double cutoff);
    /// h(lambda) = sum_j w[j] * lambda^j
    static FilterSpec polynomial(std::vector<double> w);
};

/// Apply U h(Lambda) U^T x. The response is evaluated once per group of
/// numerically equal eigenvalues and applied through that group's spectral
/// projector, so degenerate eigenspaces are filtered as a whole.
Matrix spectral_filter(const SpectralBasis& basis, const FilterSpec& spec, const Matrix& x);
Matrix spectral_filter(const SparseMatrix& laplacian, const FilterSpec& spec, const Matrix& x);

/// Apply sum_j w[j] L^j x by repeated sparse matrix products; w[0] is the
/// identity tap. Never forms dense powers of L.
Matrix spatial_filter(const SparseMatrix& laplacian, const std::vector<double>& w,
                      const Matrix& x);

/// Orthogonal split of a k-cochain into the part induced from below
/// (range of B_k^T), the part induced from above (range of B_{k+1}) and the
/// harmonic remainder (kernel of the full Laplacian).
struct HodgeParts {
    Matrix lower_induced;
    Matrix upper_induced;
    Matrix harmonic;
};

HodgeParts hodge_decompose(const SimplicialComplex& complex, int k, const Matrix& x);

/// Relative threshold below which an eigenvalue counts as zero.
double zero_eigenvalue_threshold(const std::vector<double>& eigenvalues);

} // namespace splx
