#pragma once

#include <vector>

#include "splx/matrix.hpp"
#include "splx/sparse.hpp"

namespace splx {

/// Heavy matrix kernels. The primary entry points parallelize across output
/// rows with OpenMP; every floating-point accumulation happens in the same
/// order as in the serial reference versions under splx::ref, so results are
/// bitwise identical for any thread count.
namespace kernels {

/// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);

/// C = A^T * B (gradient accumulation against weight matrices)
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

/// C = A * B^T (pushing gradients back through weight matrices)
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

/// C = S * X for sparse S
Matrix spmm(const SparseMatrix& s, const Matrix& x);

/// C = B * X for a signed incidence matrix (coefficients are +1/-1)
Matrix spmm(const IncidenceMatrix& b, const Matrix& x);

/// C = S * W where every entry of S is exactly +1 or -1; computed with
/// additions and subtractions only. Matches matmul(S, W) bitwise.
Matrix sign_matmul(const Matrix& signs, const Matrix& w);

/// Fraction of entries equal to +1 or -1 exactly.
double sign_fraction(const Matrix& m);

// Cheap elementwise helpers, serial.
void add_inplace(Matrix& a, const Matrix& b);
void add_scaled_inplace(Matrix& a, const Matrix& b, double alpha);
void scale_inplace(Matrix& a, double alpha);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// out[i, j] = scale[i] * a[i, j]
Matrix row_scale(const Matrix& a, const std::vector<double>& scale);

/// dot product of matching rows: out[i] = <a[i,:], b[i,:]>
std::vector<double> rowwise_dot(const Matrix& a, const Matrix& b);

} // namespace kernels

/// Plain serial implementations kept as the reference the parallel kernels
/// are tested and benchmarked against.
namespace ref {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);
Matrix spmm(const SparseMatrix& s, const Matrix& x);
Matrix spmm(const IncidenceMatrix& b, const Matrix& x);
Matrix sign_matmul(const Matrix& signs, const Matrix& w);

} // namespace ref

} // namespace splx
