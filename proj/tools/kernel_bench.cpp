// Times the OpenMP kernels against the serial reference implementations on
// growing problem sizes and verifies that both produce identical results.
// The parallel kernels keep the serial per-row accumulation order, so
// "identical" means bitwise, not approximately.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "splx/kernels.hpp"
#include "splx/matrix.hpp"
#include "splx/rng.hpp"
#include "splx/sparse.hpp"

using namespace splx;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
    return m;
}

Matrix random_signs(Rng& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.below(2) ? 1.0 : -1.0;
    return m;
}

SparseMatrix random_sparse(Rng& rng, std::size_t r, std::size_t c, double density) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            if (rng.uniform() < density) triplets.emplace_back(i, j, rng.uniform(-1.0, 1.0));
    return SparseMatrix::from_triplets(r, c, triplets);
}

struct Timed {
    double seconds = 0.0;
    Matrix result;
};

Timed time_call(const std::function<Matrix()>& f, int reps) {
    Timed t;
    t.result = f(); // warm-up, also the comparison value
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) {
        Matrix out = f();
        // keep the call alive
        if (out.size() != t.result.size()) std::abort();
    }
    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
                reps;
    return t;
}

void report(const std::string& name, std::size_t n, const Timed& serial, const Timed& parallel) {
    const bool equal = serial.result == parallel.result;
    std::printf("%-14s n=%-5zu serial %10.3f us   parallel %10.3f us   speedup %5.2fx   %s\n",
                name.c_str(), n, serial.seconds * 1e6, parallel.seconds * 1e6,
                parallel.seconds > 0.0 ? serial.seconds / parallel.seconds : 0.0,
                equal ? "bitwise equal" : "MISMATCH");
    if (!equal) std::exit(1);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled at build time; comparing identical code paths\n");
#endif

    Rng rng(1);
    for (std::size_t n : {32u, 64u, 128u, 256u, 384u}) {
        const int reps = n <= 64 ? 50 : (n <= 128 ? 20 : 5);

        Matrix a = random_matrix(rng, n, n);
        Matrix b = random_matrix(rng, n, n);
        report("matmul", n, time_call([&] { return ref::matmul(a, b); }, reps),
               time_call([&] { return kernels::matmul(a, b); }, reps));
        report("matmul_at_b", n, time_call([&] { return ref::matmul_at_b(a, b); }, reps),
               time_call([&] { return kernels::matmul_at_b(a, b); }, reps));
        report("matmul_a_bt", n, time_call([&] { return ref::matmul_a_bt(a, b); }, reps),
               time_call([&] { return kernels::matmul_a_bt(a, b); }, reps));

        SparseMatrix s = random_sparse(rng, n, n, 0.05);
        Matrix x = random_matrix(rng, n, 32);
        report("spmm", n, time_call([&] { return ref::spmm(s, x); }, reps),
               time_call([&] { return kernels::spmm(s, x); }, reps));

        Matrix signs = random_signs(rng, n, n);
        report("sign_matmul", n, time_call([&] { return ref::sign_matmul(signs, b); }, reps),
               time_call([&] { return kernels::sign_matmul(signs, b); }, reps));
    }
    std::printf("all kernels bitwise equal to the serial reference\n");
    return 0;
}
