#include "splx/kernels.hpp"

#include <cmath>
#include <cstdint>

#include "splx/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace splx {
namespace {

// Below this many multiply-adds the parallel dispatch is not worth it.
constexpr std::size_t kParallelCutoff = 1u << 15;

void check_inner(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw DimensionMismatchError(std::string(what) + ": inner dimensions differ");
}

} // namespace

namespace ref {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.rows(), "matmul");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.row(i);
        const double* arow = a.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double av = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_inner(a.rows(), b.rows(), "matmul_at_b");
    Matrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) {
        double* crow = c.row(i);
        for (std::size_t r = 0; r < a.rows(); ++r) {
            double av = a(r, i);
            const double* brow = b.row(r);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.cols(), "matmul_a_bt");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.row(i);
        const double* arow = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row(j);
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) sum += arow[k] * brow[k];
            crow[j] = sum;
        }
    }
    return c;
}

Matrix spmm(const SparseMatrix& s, const Matrix& x) {
    check_inner(s.cols, x.rows(), "spmm");
    Matrix c(s.rows, x.cols());
    for (std::size_t i = 0; i < s.rows; ++i) {
        double* crow = c.row(i);
        for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
            double v = s.vals[p];
            const double* xrow = x.row(s.col_idx[p]);
            for (std::size_t j = 0; j < x.cols(); ++j) crow[j] += v * xrow[j];
        }
    }
    return c;
}

Matrix spmm(const IncidenceMatrix& b, const Matrix& x) {
    check_inner(b.cols, x.rows(), "spmm");
    Matrix c(b.rows, x.cols());
    for (std::size_t i = 0; i < b.rows; ++i) {
        double* crow = c.row(i);
        for (std::size_t p = b.row_ptr[i]; p < b.row_ptr[i + 1]; ++p) {
            const double* xrow = x.row(b.col_idx[p]);
            if (b.coef[p] > 0)
                for (std::size_t j = 0; j < x.cols(); ++j) crow[j] += xrow[j];
            else
                for (std::size_t j = 0; j < x.cols(); ++j) crow[j] -= xrow[j];
        }
    }
    return c;
}

Matrix sign_matmul(const Matrix& signs, const Matrix& w) {
    check_inner(signs.cols(), w.rows(), "sign_matmul");
    Matrix c(signs.rows(), w.cols());
    for (std::size_t i = 0; i < signs.rows(); ++i) {
        double* crow = c.row(i);
        const double* srow = signs.row(i);
        for (std::size_t k = 0; k < signs.cols(); ++k) {
            const double* wrow = w.row(k);
            if (srow[k] > 0.0)
                for (std::size_t j = 0; j < w.cols(); ++j) crow[j] += wrow[j];
            else
                for (std::size_t j = 0; j < w.cols(); ++j) crow[j] -= wrow[j];
        }
    }
    return c;
}

} // namespace ref

namespace kernels {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.rows(), "matmul");
    if (a.rows() * a.cols() * b.cols() < kParallelCutoff) return ref::matmul(a, b);
    Matrix c(a.rows(), b.cols());
    const std::int64_t n = static_cast<std::int64_t>(a.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        double* crow = c.row(static_cast<std::size_t>(i));
        const double* arow = a.row(static_cast<std::size_t>(i));
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double av = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_inner(a.rows(), b.rows(), "matmul_at_b");
    if (a.rows() * a.cols() * b.cols() < kParallelCutoff) return ref::matmul_at_b(a, b);
    Matrix c(a.cols(), b.cols());
    const std::int64_t n = static_cast<std::int64_t>(a.cols());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        double* crow = c.row(static_cast<std::size_t>(i));
        for (std::size_t r = 0; r < a.rows(); ++r) {
            double av = a(r, static_cast<std::size_t>(i));
            const double* brow = b.row(r);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.cols(), "matmul_a_bt");
    if (a.rows() * a.cols() * b.rows() < kParallelCutoff) return ref::matmul_a_bt(a, b);
    Matrix c(a.rows(), b.rows());
    const std::int64_t n = static_cast<std::int64_t>(a.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        double* crow = c.row(static_cast<std::size_t>(i));
        const double* arow = a.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row(j);
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) sum += arow[k] * brow[k];
            crow[j] = sum;
        }
    }
    return c;
}

Matrix spmm(const SparseMatrix& s, const Matrix& x) {
    check_inner(s.cols, x.rows(), "spmm");
    if (s.nnz() * x.cols() < kParallelCutoff) return ref::spmm(s, x);
    Matrix c(s.rows, x.cols());
    const std::int64_t n = static_cast<std::int64_t>(s.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        double* crow = c.row(static_cast<std::size_t>(i));
        for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
            double v = s.vals[p];
            const double* xrow = x.row(s.col_idx[p]);
            for (std::size_t j = 0; j < x.cols(); ++j) crow[j] += v * xrow[j];
        }
    }
    return c;
}

Matrix spmm(const IncidenceMatrix& b, const Matrix& x) {
    check_inner(b.cols, x.rows(), "spmm");
    if (b.nnz() * x.cols() < kParallelCutoff) return ref::spmm(b, x);
    Matrix c(b.rows, x.cols());
    const std::int64_t n = static_cast<std::int64_t>(b.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        double* crow = c.row(static_cast<std::size_t>(i));
        for (std::size_t p = b.row_ptr[i]; p < b.row_ptr[i + 1]; ++p) {
            const double* xrow = x.row(b.col_idx[p]);
            if (b.coef[p] > 0)
                for (std::size_t j = 0; j < x.cols(); ++j) crow[j] += xrow[j];
            else
                for (std::size_t j = 0; j < x.cols(); ++j) crow[j] -= xrow[j];
        }
    }
    return c;
}

Matrix sign_matmul(const Matrix& signs, const Matrix& w) {
    check_inner(signs.cols(), w.rows(), "sign_matmul");
    if (signs.rows() * signs.cols() * w.cols() < kParallelCutoff)
        return ref::sign_matmul(signs, w);
    Matrix c(signs.rows(), w.cols());
    const std::int64_t n = static_cast<std::int64_t>(signs.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        double* crow = c.row(static_cast<std::size_t>(i));
        const double* srow = signs.row(static_cast<std::size_t>(i));
        for (std::size_t k = 0; k < signs.cols(); ++k) {
            const double* wrow = w.row(k);
            if (srow[k] > 0.0)
                for (std::size_t j = 0; j < w.cols(); ++j) crow[j] += wrow[j];
            else
                for (std::size_t j = 0; j < w.cols(); ++j) crow[j] -= wrow[j];
        }
    }
    return c;
}

double sign_fraction(const Matrix& m) {
    if (m.empty()) return 0.0;
    std::size_t hits = 0;
    const double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i)
        if (p[i] == 1.0 || p[i] == -1.0) ++hits;
    return static_cast<double>(hits) / static_cast<double>(m.size());
}

void add_inplace(Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatchError("add: shapes differ");
    double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

void add_scaled_inplace(Matrix& a, const Matrix& b, double alpha) {
    if (!a.same_shape(b)) throw DimensionMismatchError("add_scaled: shapes differ");
    double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] += alpha * pb[i];
}

void scale_inplace(Matrix& a, double alpha) {
    double* pa = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] *= alpha;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatchError("hadamard: shapes differ");
    Matrix c(a.rows(), a.cols());
    double* pc = c.data();
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) pc[i] = pa[i] * pb[i];
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix row_scale(const Matrix& a, const std::vector<double>& scale) {
    if (scale.size() != a.rows()) throw DimensionMismatchError("row_scale: length differs");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = scale[i];
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) crow[j] = s * arow[j];
    }
    return c;
}

std::vector<double> rowwise_dot(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatchError("rowwise_dot: shapes differ");
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        const double* brow = b.row(i);
        double sum = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) sum += arow[j] * brow[j];
        out[i] = sum;
    }
    return out;
}

} // namespace kernels
} // namespace splx
