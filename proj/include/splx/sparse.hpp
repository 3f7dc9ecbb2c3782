#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "splx/matrix.hpp"

namespace splx {

/// Signed incidence (boundary) matrix in compressed sparse row form.
/// Coefficients are stored as integers and are always +1 or -1; no
/// explicit zeros are kept. Rows index (k-1)-simplices, columns index
/// k-simplices, both in canonical lexicographic order.
struct IncidenceMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr; // rows + 1
    std::vector<std::size_t> col_idx;
    std::vector<std::int8_t> coef;

    std::size_t nnz() const { return col_idx.size(); }

    /// Transpose, still in CSR form.
    IncidenceMatrix transposed() const;

    Matrix to_dense() const;
};

/// Real sparse matrix in compressed sparse row form. Used for Hodge
/// Laplacians, which are integer-valued but consumed by floating-point
/// kernels. No explicit zeros are stored.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col_idx;
    std::vector<double> vals;

    std::size_t nnz() const { return col_idx.size(); }

    static SparseMatrix from_triplets(
        std::size_t rows, std::size_t cols,
        const std::vector<std::tuple<std::size_t, std::size_t, double>>& triplets);

    Matrix to_dense() const;
};

/// Product of two incidence matrices, accumulated in exact integer
/// arithmetic. `value` drops entries that cancel to zero; `max_abs` is the
/// largest |entry| over the structural product before dropping, which is
/// what the boundary-of-boundary check needs.
struct IncidenceProduct {
    SparseMatrix value;
    long long max_abs = 0;
};

IncidenceProduct multiply_incidence(const IncidenceMatrix& a, const IncidenceMatrix& b);

/// Sum of two sparse matrices with identical shape.
SparseMatrix add_sparse(const SparseMatrix& a, const SparseMatrix& b);

} // namespace splx
