#include "splx/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "splx/errors.hpp"
#include "splx/kernels.hpp"

namespace splx {
namespace {

constexpr double kZeroEigenRel = 1e-8;

// Spacing under which neighboring eigenvalues are treated as one
// degenerate group when applying a frequency response.
double group_tolerance(const std::vector<double>& ev) {
    double top = ev.empty() ? 0.0 : ev.back();
    return 1e-9 * std::max(1.0, top);
}

} // namespace

double zero_eigenvalue_threshold(const std::vector<double>& eigenvalues) {
    double top = eigenvalues.empty() ? 0.0 : eigenvalues.back();
    return kZeroEigenRel * std::max(1.0, top);
}

SpectralBasis sft_basis(const SparseMatrix& laplacian) {
    if (laplacian.rows != laplacian.cols)
        throw DimensionMismatchError("sft_basis: matrix is not square");
    const std::size_t n = laplacian.rows;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t p = laplacian.row_ptr[r]; p < laplacian.row_ptr[r + 1]; ++p)
            dense(static_cast<Eigen::Index>(r),
                  static_cast<Eigen::Index>(laplacian.col_idx[p])) = laplacian.vals[p];

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("eigendecomposition did not converge");

    SpectralBasis basis;
    basis.eigenvalues.resize(n);
    basis.u = Matrix(n, n);
    // Eigen returns eigenvalues ascending already.
    for (std::size_t j = 0; j < n; ++j) {
        basis.eigenvalues[j] = std::max(0.0, solver.eigenvalues()(static_cast<Eigen::Index>(j)));
        // Fix the sign: largest-magnitude entry becomes positive, ties by
        // lowest row index.
        std::size_t pivot = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double mag = std::abs(solver.eigenvectors()(static_cast<Eigen::Index>(i),
                                                        static_cast<Eigen::Index>(j)));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        double flip = solver.eigenvectors()(static_cast<Eigen::Index>(pivot),
                                            static_cast<Eigen::Index>(j)) < 0.0
                          ? -1.0
                          : 1.0;
        for (std::size_t i = 0; i < n; ++i)
            basis.u(i, j) = flip * solver.eigenvectors()(static_cast<Eigen::Index>(i),
                                                         static_cast<Eigen::Index>(j));
    }
    return basis;
}

Matrix sft_forward(const SpectralBasis& basis, const Matrix& x) {
    if (x.rows() != basis.u.rows())
        throw DimensionMismatchError("sft_forward: cochain length does not match basis");
    return kernels::matmul_at_b(basis.u, x);
}

Matrix sft_inverse(const SpectralBasis& basis, const Matrix& coeffs) {
    if (coeffs.rows() != basis.u.rows())
        throw DimensionMismatchError("sft_inverse: coefficient length does not match basis");
    return kernels::matmul(basis.u, coeffs);
}

FilterSpec FilterSpec::low_pass(double cutoff) {
    return {[cutoff](double lam) { return lam < cutoff ? 1.0 : 0.0; }};
}

FilterSpec FilterSpec::high_pass(double cutoff) {
    return {[cutoff](double lam) { return lam < cutoff ? 0.0 : 1.0; }};
}

FilterSpec FilterSpec::polynomial(std::vector<double> w) {
    return {[w = std::move(w)](double lam) {
        double acc = 0.0;
        double pow = 1.0;
        for (double c : w) {
            acc += c * pow;
            pow *= lam;
        }
        return acc;
    }};
}

Matrix spectral_filter(const SpectralBasis& basis, const FilterSpec& spec, const Matrix& x) {
    if (x.rows() != basis.u.rows())
        throw DimensionMismatchError("spectral_filter: cochain length does not match basis");
    if (!spec.response) throw UsageError("spectral_filter: filter has no response function");

    const std::size_t n = basis.u.rows();
    Matrix coeffs = sft_forward(basis, x);
    const double tol = group_tolerance(basis.eigenvalues);

    // Scale coefficient rows group by group so one degenerate eigenspace
    // gets exactly one response value.
    std::size_t start = 0;
    while (start < n) {
        std::size_t stop = start + 1;
        while (stop < n && basis.eigenvalues[stop] - basis.eigenvalues[stop - 1] <= tol) ++stop;
        double sum = 0.0;
        for (std::size_t i = start; i < stop; ++i) sum += basis.eigenvalues[i];
        double h = spec.response(sum / static_cast<double>(stop - start));
        for (std::size_t i = start; i < stop; ++i)
            for (std::size_t j = 0; j < coeffs.cols(); ++j) coeffs(i, j) *= h;
        start = stop;
    }
    return sft_inverse(basis, coeffs);
}

Matrix spectral_filter(const SparseMatrix& laplacian, const FilterSpec& spec, const Matrix& x) {
    return spectral_filter(sft_basis(laplacian), spec, x);
}

Matrix spatial_filter(const SparseMatrix& laplacian, const std::vector<double>& w,
                      const Matrix& x) {
    if (laplacian.rows != laplacian.cols)
        throw DimensionMismatchError("spatial_filter: matrix is not square");
    if (x.rows() != laplacian.rows)
        throw DimensionMismatchError("spatial_filter: cochain length does not match Laplacian");
    if (w.empty()) throw UsageError("spatial_filter: no filter taps given");

    Matrix y(x.rows(), x.cols());
    kernels::add_scaled_inplace(y, x, w[0]);
    Matrix power = x;
    for (std::size_t j = 1; j < w.size(); ++j) {
        power = kernels::spmm(laplacian, power);
        kernels::add_scaled_inplace(y, power, w[j]);
    }
    return y;
}

namespace {

// Projection of x onto the span of eigenvectors with eigenvalue above the
// zero threshold.
Matrix nonzero_eigenspace_projection(const SparseMatrix& laplacian, const Matrix& x) {
    SpectralBasis basis = sft_basis(laplacian);
    Matrix coeffs = sft_forward(basis, x);
    const double tol = zero_eigenvalue_threshold(basis.eigenvalues);
    for (std::size_t i = 0; i < coeffs.rows(); ++i)
        if (basis.eigenvalues[i] <= tol)
            for (std::size_t j = 0; j < coeffs.cols(); ++j) coeffs(i, j) = 0.0;
    return sft_inverse(basis, coeffs);
}

} // namespace

HodgeParts hodge_decompose(const SimplicialComplex& complex, int k, const Matrix& x) {
    const HodgeTriple& triple = complex.laplacians(k);
    if (x.rows() != complex.count(k))
        throw DimensionMismatchError("hodge_decompose: cochain length does not match order " +
                                     std::to_string(k));
    HodgeParts parts;
    parts.lower_induced = triple.lower ? nonzero_eigenspace_projection(*triple.lower, x)
                                       : Matrix(x.rows(), x.cols());
    parts.upper_induced = triple.upper ? nonzero_eigenspace_projection(*triple.upper, x)
                                       : Matrix(x.rows(), x.cols());
    parts.harmonic = x;
    kernels::add_scaled_inplace(parts.harmonic, parts.lower_induced, -1.0);
    kernels::add_scaled_inplace(parts.harmonic, parts.upper_induced, -1.0);
    return parts;
}

} // namespace splx
