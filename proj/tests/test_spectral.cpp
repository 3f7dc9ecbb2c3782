#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "splx/complex.hpp"
#include "splx/errors.hpp"
#include "splx/kernels.hpp"
#include "splx/rng.hpp"
#include "splx/spectral.hpp"

using namespace splx;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

double max_abs(const Matrix& a) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data()[i]));
    return worst;
}

double frobenius(const Matrix& a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a.data()[i] * a.data()[i];
    return std::sqrt(sum);
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
    return m;
}

SimplicialComplex filled_triangle() { return build_complex({{}, {}, {{0, 1, 2}}}); }

SimplicialComplex hollow_triangle() {
    return build_complex({{}, {{0, 1}, {0, 2}, {1, 2}}});
}

SimplicialComplex random_complex(Rng& rng) {
    int n = 5 + static_cast<int>(rng.below(8));
    std::vector<std::set<Simplex>> tops(4);
    int cliques = 2 + static_cast<int>(rng.below(4));
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    for (int c = 0; c < cliques; ++c) {
        int size = 2 + static_cast<int>(rng.below(3));
        rng.shuffle(ids);
        Simplex s(ids.begin(), ids.begin() + size);
        std::sort(s.begin(), s.end());
        tops[size - 1].insert(std::move(s));
    }
    std::vector<std::vector<Simplex>> by_order(4);
    for (int k = 1; k < 4; ++k) by_order[k].assign(tops[k].begin(), tops[k].end());
    for (int v = 0; v < n; ++v) by_order[0].push_back({v});
    return build_complex(by_order);
}

} // namespace

TEST_CASE("filled triangle edge Laplacian has a flat spectrum") {
    auto c = filled_triangle();
    SpectralBasis basis = sft_basis(c.laplacians(1).full);
    REQUIRE(basis.eigenvalues.size() == 3);
    for (double ev : basis.eigenvalues) CHECK(ev == doctest::Approx(3.0).epsilon(1e-12));

    // Scalar spectrum: any response acts as multiplication by h(3).
    Rng rng(5);
    Matrix x = random_matrix(rng, 3, 2);
    FilterSpec square{[](double lam) { return lam * lam; }};
    Matrix y = spectral_filter(basis, square, x);
    Matrix want = x;
    kernels::scale_inplace(want, 9.0);
    CHECK(max_abs_diff(y, want) < 1e-9);
}

TEST_CASE("hollow triangle zero mode is the alternating edge vector") {
    auto c = hollow_triangle();
    SpectralBasis basis = sft_basis(c.laplacians(1).full);
    REQUIRE(basis.eigenvalues.size() == 3);
    CHECK(basis.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(basis.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(basis.eigenvalues[2] == doctest::Approx(3.0).epsilon(1e-12));

    const double r3 = 1.0 / std::sqrt(3.0);
    CHECK(basis.u(0, 0) == doctest::Approx(r3).epsilon(1e-10));
    CHECK(basis.u(1, 0) == doctest::Approx(-r3).epsilon(1e-10));
    CHECK(basis.u(2, 0) == doctest::Approx(r3).epsilon(1e-10));

    // The alternating vector transforms to sqrt(3) in the zero slot.
    Matrix h{{1}, {-1}, {1}};
    Matrix coeffs = sft_forward(basis, h);
    CHECK(coeffs(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
    CHECK(std::abs(coeffs(1, 0)) < 1e-10);
    CHECK(std::abs(coeffs(2, 0)) < 1e-10);

    // Ideal low-pass projects onto that mode.
    Matrix e0{{1}, {0}, {0}};
    Matrix y = spectral_filter(basis, FilterSpec::low_pass(1e-6), e0);
    Matrix want{{1.0 / 3.0}, {-1.0 / 3.0}, {1.0 / 3.0}};
    CHECK(max_abs_diff(y, want) < 1e-10);

    // Applying the projector twice changes nothing.
    Matrix yy = spectral_filter(basis, FilterSpec::low_pass(1e-6), y);
    CHECK(max_abs_diff(yy, y) < 1e-10);

    // High-pass is the complement.
    Matrix z = spectral_filter(basis, FilterSpec::high_pass(1e-6), e0);
    kernels::add_inplace(z, y);
    CHECK(max_abs_diff(z, e0) < 1e-10);
}

TEST_CASE("one by one zero matrix") {
    SparseMatrix z;
    z.rows = z.cols = 1;
    z.row_ptr = {0, 0};
    SpectralBasis basis = sft_basis(z);
    CHECK(basis.eigenvalues == std::vector<double>{0.0});
    CHECK(basis.u(0, 0) == 1.0);
}

TEST_CASE("basis is orthonormal with an ascending clamped spectrum") {
    Rng rng(17);
    for (int trial = 0; trial < 15; ++trial) {
        auto c = random_complex(rng);
        int k = static_cast<int>(rng.below(c.order() + 1));
        SpectralBasis basis = sft_basis(c.laplacians(k).full);
        const std::size_t n = basis.u.rows();

        Matrix gram = kernels::matmul_at_b(basis.u, basis.u);
        for (std::size_t i = 0; i < n; ++i) gram(i, i) -= 1.0;
        CHECK(max_abs(gram) <= 1e-8);

        for (std::size_t i = 0; i < n; ++i) {
            CHECK(basis.eigenvalues[i] >= 0.0);
            if (i) CHECK(basis.eigenvalues[i] >= basis.eigenvalues[i - 1]);
        }

        // U diag(lambda) U^T reconstructs the Laplacian.
        Matrix recon = kernels::matmul(
            basis.u, kernels::row_scale(kernels::transpose(basis.u), basis.eigenvalues));
        CHECK(max_abs_diff(recon, c.laplacians(k).full.to_dense()) <= 1e-8);
    }
}

TEST_CASE("basis construction is deterministic") {
    auto c = hollow_triangle();
    SpectralBasis a = sft_basis(c.laplacians(1).full);
    SpectralBasis b = sft_basis(c.laplacians(1).full);
    CHECK(a.u == b.u);
    CHECK(a.eigenvalues == b.eigenvalues);
}

TEST_CASE("transform round trip, Parseval and linearity") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        auto c = random_complex(rng);
        int k = static_cast<int>(rng.below(c.order() + 1));
        SpectralBasis basis = sft_basis(c.laplacians(k).full);
        std::size_t n = c.count(k);

        Matrix x = random_matrix(rng, n, 1 + rng.below(3));
        Matrix back = sft_inverse(basis, sft_forward(basis, x));
        CHECK(max_abs_diff(back, x) <= 1e-8);

        CHECK(frobenius(sft_forward(basis, x)) ==
              doctest::Approx(frobenius(x)).epsilon(1e-8));

        Matrix y = random_matrix(rng, n, x.cols());
        Matrix combo(n, x.cols());
        kernels::add_scaled_inplace(combo, x, 2.5);
        kernels::add_scaled_inplace(combo, y, -1.25);
        Matrix lhs = sft_forward(basis, combo);
        Matrix rhs(n, x.cols());
        kernels::add_scaled_inplace(rhs, sft_forward(basis, x), 2.5);
        kernels::add_scaled_inplace(rhs, sft_forward(basis, y), -1.25);
        CHECK(max_abs_diff(lhs, rhs) <= 1e-8);
    }
}

TEST_CASE("basis columns map to coordinate vectors") {
    auto c = hollow_triangle();
    SpectralBasis basis = sft_basis(c.laplacians(1).full);
    Matrix u1(3, 1);
    for (std::size_t i = 0; i < 3; ++i) u1(i, 0) = basis.u(i, 1);
    Matrix coeffs = sft_forward(basis, u1);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(coeffs(i, 0) == doctest::Approx(i == 1 ? 1.0 : 0.0).epsilon(1e-10));

    Matrix e1(3, 1);
    e1(1, 0) = 1.0;
    CHECK(max_abs_diff(sft_inverse(basis, e1), u1) < 1e-12);
}

TEST_CASE("identity and constant filters") {
    auto c = filled_triangle();
    Rng rng(41);
    Matrix x = random_matrix(rng, 3, 2);
    const SparseMatrix& l1 = c.laplacians(1).full;

    Matrix y = spectral_filter(l1, FilterSpec{[](double) { return 1.0; }}, x);
    CHECK(max_abs_diff(y, x) <= 1e-10);

    CHECK(spatial_filter(l1, {1.0}, x) == x);

    Matrix z = spatial_filter(l1, {0.0, 1.0}, x);
    Matrix want = x;
    kernels::scale_inplace(want, 3.0);
    CHECK(max_abs_diff(z, want) == 0.0);
}

TEST_CASE("polynomial filtering agrees between spectral and spatial forms") {
    Rng rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        auto c = random_complex(rng);
        int k = static_cast<int>(rng.below(c.order() + 1));
        const SparseMatrix& lap = c.laplacians(k).full;
        std::size_t taps = 1 + rng.below(4); // degree up to 4 with the identity tap
        std::vector<double> w(taps + 1);
        for (double& v : w) v = rng.uniform(-1.0, 1.0);
        Matrix x = random_matrix(rng, c.count(k), 1 + rng.below(2));

        Matrix spatial = spatial_filter(lap, w, x);
        Matrix spectral = spectral_filter(lap, FilterSpec::polynomial(w), x);
        double scale = std::max(1.0, max_abs(spatial));
        CHECK(max_abs_diff(spatial, spectral) <= 1e-6 * scale);
    }
}

TEST_CASE("degenerate eigenspaces are filtered as one block") {
    // Two disjoint edges: the vertex Laplacian has eigenvalues {0,0,2,2};
    // an ideal low-pass averages within each component.
    auto c = build_complex({{}, {{0, 1}, {2, 3}}});
    const SparseMatrix& l0 = c.laplacians(0).full;
    Matrix x{{1}, {5}, {-2}, {4}};
    Matrix y = spectral_filter(l0, FilterSpec::low_pass(1.0), x);
    Matrix want{{3}, {3}, {1}, {1}};
    CHECK(max_abs_diff(y, want) <= 1e-10);
}

TEST_CASE("hodge decomposition on the worked triangles") {
    Rng rng(47);

    // Full-rank edge Laplacian leaves no harmonic part.
    auto filled = filled_triangle();
    Matrix x = random_matrix(rng, 3, 1);
    HodgeParts parts = hodge_decompose(filled, 1, x);
    CHECK(max_abs(parts.harmonic) <= 1e-8);

    // The hollow triangle's alternating flow is purely harmonic.
    auto hollow = hollow_triangle();
    Matrix h{{1}, {-1}, {1}};
    HodgeParts hp = hodge_decompose(hollow, 1, h);
    CHECK(max_abs_diff(hp.harmonic, h) <= 1e-8);
    CHECK(max_abs(hp.lower_induced) <= 1e-8);
    CHECK(max_abs(hp.upper_induced) <= 1e-8);

    // A signal built as B_k^T y is entirely lower-induced.
    Matrix y = random_matrix(rng, 3, 1);
    Matrix grad = kernels::spmm(filled.incidence_transposed(1), y);
    HodgeParts gp = hodge_decompose(filled, 1, grad);
    CHECK(max_abs_diff(gp.lower_induced, grad) <= 1e-8);
    CHECK(max_abs(gp.upper_induced) <= 1e-8);
    CHECK(max_abs(gp.harmonic) <= 1e-8);
}

TEST_CASE("hodge parts reconstruct, stay orthogonal and the remainder is harmonic") {
    Rng rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        auto c = random_complex(rng);
        int k = static_cast<int>(rng.below(c.order() + 1));
        Matrix x = random_matrix(rng, c.count(k), 1 + rng.below(3));
        HodgeParts parts = hodge_decompose(c, k, x);

        Matrix sum = parts.lower_induced;
        kernels::add_inplace(sum, parts.upper_induced);
        kernels::add_inplace(sum, parts.harmonic);
        CHECK(max_abs_diff(sum, x) <= 1e-8);

        auto col_dot = [](const Matrix& a, const Matrix& b, std::size_t col) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, col) * b(i, col);
            return s;
        };
        for (std::size_t col = 0; col < x.cols(); ++col) {
            CHECK(std::abs(col_dot(parts.lower_induced, parts.upper_induced, col)) <= 1e-8);
            CHECK(std::abs(col_dot(parts.lower_induced, parts.harmonic, col)) <= 1e-8);
            CHECK(std::abs(col_dot(parts.upper_induced, parts.harmonic, col)) <= 1e-8);
        }

        Matrix lh = kernels::spmm(c.laplacians(k).full, parts.harmonic);
        CHECK(max_abs(lh) <= 1e-8);
    }
}

TEST_CASE("zero eigenvalue threshold scales with the spectrum") {
    CHECK(zero_eigenvalue_threshold({}) == 1e-8);
    CHECK(zero_eigenvalue_threshold({0.0, 0.5}) == 1e-8);
    CHECK(zero_eigenvalue_threshold({0.0, 5.0}) == doctest::Approx(5e-8));
}

TEST_CASE("spectral error handling") {
    SparseMatrix rect;
    rect.rows = 2;
    rect.cols = 3;
    rect.row_ptr = {0, 0, 0};
    CHECK_THROWS_AS(sft_basis(rect), DimensionMismatchError);

    auto c = filled_triangle();
    SpectralBasis basis = sft_basis(c.laplacians(1).full);
    Matrix wrong(2, 1);
    CHECK_THROWS_AS(sft_forward(basis, wrong), DimensionMismatchError);
    CHECK_THROWS_AS(sft_inverse(basis, wrong), DimensionMismatchError);
    CHECK_THROWS_AS(spectral_filter(basis, FilterSpec::low_pass(1.0), wrong),
                    DimensionMismatchError);
    CHECK_THROWS_AS(spectral_filter(basis, FilterSpec{}, Matrix(3, 1)), UsageError);
    CHECK_THROWS_AS(spatial_filter(c.laplacians(1).full, {}, Matrix(3, 1)), UsageError);
    CHECK_THROWS_AS(spatial_filter(c.laplacians(1).full, {1.0}, wrong), DimensionMismatchError);
    CHECK_THROWS_AS(hodge_decompose(c, 1, wrong), DimensionMismatchError);
    CHECK_THROWS_AS(hodge_decompose(c, 5, Matrix(1, 1)), OrderOutOfRangeError);
}
