#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <set>

#include "splx/complex.hpp"
#include "splx/errors.hpp"
#include "splx/kernels.hpp"
#include "splx/rng.hpp"

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

SimplicialComplex filled_triangle() { return build_complex({{}, {}, {{0, 1, 2}}}); }

SimplicialComplex hollow_triangle() {
    return build_complex({{}, {{0, 1}, {0, 2}, {1, 2}}});
}

/// Union of random cliques over a handful of vertices, top cells only;
/// closure supplies every face.
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

TEST_CASE("filled triangle counts and ordering") {
    auto c = filled_triangle();
    CHECK(c.order() == 2);
    CHECK(c.count(0) == 3);
    CHECK(c.count(1) == 3);
    CHECK(c.count(2) == 1);
    CHECK(c.count(3) == 0);
    CHECK(c.count(-1) == 0);
    CHECK(c.inserted_face_count() == 6);

    std::vector<Simplex> edges{{0, 1}, {0, 2}, {1, 2}};
    CHECK(c.simplices(1) == edges);
    CHECK(c.simplices(2) == std::vector<Simplex>{{0, 1, 2}});
}

TEST_CASE("filled triangle incidence matrices") {
    auto c = filled_triangle();
    Matrix b1{{-1, -1, 0}, {1, 0, -1}, {0, 1, 1}};
    Matrix b2{{1}, {-1}, {1}};
    CHECK(max_abs_diff(c.incidence(1).to_dense(), b1) == 0.0);
    CHECK(max_abs_diff(c.incidence(2).to_dense(), b2) == 0.0);
    CHECK(max_abs_diff(c.incidence_transposed(1).to_dense(), kernels::transpose(b1)) == 0.0);
    CHECK(max_abs_diff(c.incidence_transposed(2).to_dense(), kernels::transpose(b2)) == 0.0);
}

TEST_CASE("filled triangle Hodge Laplacians") {
    auto c = filled_triangle();

    const auto& l0 = c.laplacians(0);
    CHECK_FALSE(l0.lower.has_value());
    REQUIRE(l0.upper.has_value());
    Matrix want_l0{{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}};
    CHECK(max_abs_diff(l0.full.to_dense(), want_l0) == 0.0);

    const auto& l1 = c.laplacians(1);
    REQUIRE(l1.lower.has_value());
    REQUIRE(l1.upper.has_value());
    Matrix want_lower{{2, 1, -1}, {1, 2, 1}, {-1, 1, 2}};
    Matrix want_upper{{1, -1, 1}, {-1, 1, -1}, {1, -1, 1}};
    Matrix want_full{{3, 0, 0}, {0, 3, 0}, {0, 0, 3}};
    CHECK(max_abs_diff(l1.lower->to_dense(), want_lower) == 0.0);
    CHECK(max_abs_diff(l1.upper->to_dense(), want_upper) == 0.0);
    CHECK(max_abs_diff(l1.full.to_dense(), want_full) == 0.0);

    const auto& l2 = c.laplacians(2);
    REQUIRE(l2.lower.has_value());
    CHECK_FALSE(l2.upper.has_value());
    CHECK(l2.full.to_dense()(0, 0) == 3.0);
}

TEST_CASE("hollow triangle keeps a one dimensional edge kernel") {
    auto c = hollow_triangle();
    CHECK(c.order() == 1);
    CHECK(c.inserted_face_count() == 3); // the three vertices
    const auto& l1 = c.laplacians(1);
    REQUIRE(l1.lower.has_value());
    CHECK_FALSE(l1.upper.has_value());
    Matrix want{{2, 1, -1}, {1, 2, 1}, {-1, 1, 2}};
    CHECK(max_abs_diff(l1.full.to_dense(), want) == 0.0);

    Matrix h{{1}, {-1}, {1}};
    Matrix lh = kernels::spmm(l1.full, h);
    CHECK(max_abs_diff(lh, Matrix(3, 1)) == 0.0);
}

TEST_CASE("two triangles sharing an edge") {
    auto c = build_complex({{}, {}, {{0, 1, 2}, {1, 2, 3}}});
    CHECK(c.count(0) == 4);
    CHECK(c.count(1) == 5);
    CHECK(c.count(2) == 2);
    std::vector<Simplex> edges{{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}};
    CHECK(c.simplices(1) == edges);

    // Upper Laplacian diagonal counts the triangles an edge belongs to.
    Matrix up = c.laplacians(1).upper->to_dense();
    std::vector<double> want_diag{1, 1, 2, 1, 1};
    for (std::size_t e = 0; e < 5; ++e) CHECK(up(e, e) == want_diag[e]);

    for (const auto& check : c.verify_chain_property()) CHECK(check.max_abs == 0);
}

TEST_CASE("vertex lists are sorted on input") {
    auto a = build_complex({{}, {}, {{2, 0, 1}}});
    auto b = filled_triangle();
    CHECK(a.simplices(2) == b.simplices(2));
    CHECK(a.simplices(1) == b.simplices(1));
}

TEST_CASE("closure is idempotent") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto c = random_complex(rng);
        std::vector<std::vector<Simplex>> all(c.order() + 1);
        for (int k = 0; k <= c.order(); ++k) all[k] = c.simplices(k);
        auto again = build_complex(all);
        CHECK(again.inserted_face_count() == 0);
        for (int k = 0; k <= c.order(); ++k) CHECK(again.simplices(k) == c.simplices(k));
    }
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(build_complex({}), EmptyComplexError);
    CHECK_THROWS_AS(build_complex({{}}), EmptyComplexError);
    CHECK_THROWS_AS(build_complex({{}, {{0, 0}}}), DuplicateVertexError);
    CHECK_THROWS_AS(build_complex({{}, {{0, 1}, {1, 0}}}), DuplicateSimplexError);
    CHECK_THROWS_AS(build_complex({{{0, 1}}}), DimensionMismatchError);
    CHECK_THROWS_AS(build_complex({{{-1}}}), ParseError);
}

TEST_CASE("accessor range checks") {
    auto c = filled_triangle();
    CHECK_THROWS_AS(c.simplices(3), OrderOutOfRangeError);
    CHECK_THROWS_AS(c.simplices(-1), OrderOutOfRangeError);
    CHECK_THROWS_AS(c.incidence(0), OrderOutOfRangeError);
    CHECK_THROWS_AS(c.incidence(3), OrderOutOfRangeError);
    CHECK_THROWS_AS(c.incidence_transposed(0), OrderOutOfRangeError);
    CHECK_THROWS_AS(c.laplacians(-1), OrderOutOfRangeError);
    CHECK_THROWS_AS(c.laplacians(3), OrderOutOfRangeError);
}

TEST_CASE("index_of finds canonical positions") {
    auto c = filled_triangle();
    CHECK(c.index_of(1, {0, 1}) == 0);
    CHECK(c.index_of(1, {0, 2}) == 1);
    CHECK(c.index_of(1, {1, 2}) == 2);
    CHECK(c.index_of(1, {0, 3}) == SimplicialComplex::npos);
    CHECK(c.index_of(5, {0}) == SimplicialComplex::npos);
    CHECK(c.index_of(0, {1}) == 1);
}

TEST_CASE("vertex only complex has a zero Laplacian") {
    auto c = build_complex({{{0}, {1}, {2}}});
    CHECK(c.order() == 0);
    const auto& l0 = c.laplacians(0);
    CHECK_FALSE(l0.lower.has_value());
    CHECK_FALSE(l0.upper.has_value());
    CHECK(l0.full.nnz() == 0);
    CHECK(l0.full.rows == 3);
    CHECK(c.verify_chain_property().empty());
}

TEST_CASE("incidence columns have exactly k+1 signed entries") {
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        auto c = random_complex(rng);
        for (int k = 1; k <= c.order(); ++k) {
            const IncidenceMatrix& b = c.incidence(k);
            std::vector<std::size_t> per_col(b.cols, 0);
            for (std::size_t p = 0; p < b.nnz(); ++p) {
                CHECK((b.coef[p] == 1 || b.coef[p] == -1));
                ++per_col[b.col_idx[p]];
            }
            for (std::size_t cnt : per_col) CHECK(cnt == static_cast<std::size_t>(k) + 1);
        }
    }
}

TEST_CASE("boundary of boundary vanishes exactly on random complexes") {
    Rng rng(37);
    for (int trial = 0; trial < 100; ++trial) {
        auto c = random_complex(rng);
        for (const auto& check : c.verify_chain_property()) CHECK(check.max_abs == 0);
    }
}

TEST_CASE("Laplacians are symmetric with face-count diagonals") {
    Rng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        auto c = random_complex(rng);
        for (int k = 0; k <= c.order(); ++k) {
            const auto& t = c.laplacians(k);
            Matrix full = t.full.to_dense();
            for (std::size_t i = 0; i < full.rows(); ++i)
                for (std::size_t j = 0; j < i; ++j) CHECK(full(i, j) == full(j, i));
            if (t.lower) {
                Matrix lo = t.lower->to_dense();
                for (std::size_t i = 0; i < lo.rows(); ++i) CHECK(lo(i, i) == k + 1);
            }
            if (t.lower && t.upper) {
                Matrix sum = t.lower->to_dense();
                kernels::add_inplace(sum, t.upper->to_dense());
                CHECK(max_abs_diff(full, sum) == 0.0);
            }
        }
    }
}
