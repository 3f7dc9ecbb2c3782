#include "splx/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "splx/errors.hpp"

namespace splx {

IncidenceMatrix IncidenceMatrix::transposed() const {
    IncidenceMatrix t;
    t.rows = cols;
    t.cols = rows;
    t.row_ptr.assign(cols + 1, 0);
    t.col_idx.resize(nnz());
    t.coef.resize(nnz());
    for (std::size_t c : col_idx) ++t.row_ptr[c + 1];
    for (std::size_t i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
    std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
            std::size_t dst = cursor[col_idx[p]]++;
            t.col_idx[dst] = r;
            t.coef[dst] = coef[p];
        }
    }
    return t;
}

Matrix IncidenceMatrix::to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
            d(r, col_idx[p]) = static_cast<double>(coef[p]);
    return d;
}

SparseMatrix SparseMatrix::from_triplets(
    std::size_t rows, std::size_t cols,
    const std::vector<std::tuple<std::size_t, std::size_t, double>>& triplets) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> sorted = triplets;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) {
                  return std::tie(std::get<0>(a), std::get<1>(a)) <
                         std::tie(std::get<0>(b), std::get<1>(b));
              });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    std::size_t i = 0;
    while (i < sorted.size()) {
        auto [r, c, v] = sorted[i];
        double sum = v;
        std::size_t j = i + 1;
        while (j < sorted.size() && std::get<0>(sorted[j]) == r && std::get<1>(sorted[j]) == c) {
            sum += std::get<2>(sorted[j]);
            ++j;
        }
        if (r >= rows || c >= cols)
            throw DimensionMismatchError("triplet index out of range");
        if (sum != 0.0) {
            m.col_idx.push_back(c);
            m.vals.push_back(sum);
            ++m.row_ptr[r + 1];
        }
        i = j;
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return m;
}

Matrix SparseMatrix::to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
            d(r, col_idx[p]) = vals[p];
    return d;
}

IncidenceProduct multiply_incidence(const IncidenceMatrix& a, const IncidenceMatrix& b) {
    if (a.cols != b.rows)
        throw DimensionMismatchError("incidence product: inner dimensions differ");
    IncidenceProduct out;
    SparseMatrix& m = out.value;
    m.rows = a.rows;
    m.cols = b.cols;
    m.row_ptr.assign(a.rows + 1, 0);

    // Gustavson's algorithm with an exact integer accumulator row.
    std::vector<long long> acc(b.cols, 0);
    std::vector<std::size_t> touched;
    touched.reserve(64);
    for (std::size_t i = 0; i < a.rows; ++i) {
        touched.clear();
        for (std::size_t pa = a.row_ptr[i]; pa < a.row_ptr[i + 1]; ++pa) {
            std::size_t k = a.col_idx[pa];
            long long av = a.coef[pa];
            for (std::size_t pb = b.row_ptr[k]; pb < b.row_ptr[k + 1]; ++pb) {
                std::size_t j = b.col_idx[pb];
                if (acc[j] == 0) touched.push_back(j);
                acc[j] += av * b.coef[pb];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (std::size_t j : touched) {
            long long v = acc[j];
            if (std::llabs(v) > out.max_abs) out.max_abs = std::llabs(v);
            if (v != 0) {
                m.col_idx.push_back(j);
                m.vals.push_back(static_cast<double>(v));
                ++m.row_ptr[i + 1];
            }
            acc[j] = 0;
        }
    }
    for (std::size_t r = 0; r < a.rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return out;
}

SparseMatrix add_sparse(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw DimensionMismatchError("sparse add: shapes differ");
    SparseMatrix m;
    m.rows = a.rows;
    m.cols = a.cols;
    m.row_ptr.assign(a.rows + 1, 0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        std::size_t pa = a.row_ptr[r], pb = b.row_ptr[r];
        while (pa < a.row_ptr[r + 1] || pb < b.row_ptr[r + 1]) {
            std::size_t ca = pa < a.row_ptr[r + 1] ? a.col_idx[pa] : m.cols;
            std::size_t cb = pb < b.row_ptr[r + 1] ? b.col_idx[pb] : m.cols;
            std::size_t c;
            double v;
            if (ca < cb) {
                c = ca;
                v = a.vals[pa++];
            } else if (cb < ca) {
                c = cb;
                v = b.vals[pb++];
            } else {
                c = ca;
                v = a.vals[pa++] + b.vals[pb++];
            }
            if (v != 0.0) {
                m.col_idx.push_back(c);
                m.vals.push_back(v);
                ++m.row_ptr[r + 1];
            }
        }
    }
    for (std::size_t r = 0; r < a.rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return m;
}

} // namespace splx
