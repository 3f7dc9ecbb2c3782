#include "splx/complex.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "splx/errors.hpp"

namespace splx {
namespace {

std::string simplex_to_string(const Simplex& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

} // namespace

std::size_t SimplicialComplex::count(int k) const {
    if (k < 0 || k > order()) return 0;
    return simplices_[k].size();
}

const std::vector<Simplex>& SimplicialComplex::simplices(int k) const {
    if (k < 0 || k > order())
        throw OrderOutOfRangeError("no simplices of order " + std::to_string(k));
    return simplices_[k];
}

std::size_t SimplicialComplex::index_of(int k, const Simplex& s) const {
    if (k < 0 || k > order()) return npos;
    const auto& list = simplices_[k];
    auto it = std::lower_bound(list.begin(), list.end(), s);
    if (it == list.end() || *it != s) return npos;
    return static_cast<std::size_t>(it - list.begin());
}

const IncidenceMatrix& SimplicialComplex::incidence(int k) const {
    if (k < 1 || k > order())
        throw OrderOutOfRangeError("incidence matrix B_" + std::to_string(k) +
                                   " does not exist for this complex");
    return incidence_[k - 1];
}

const IncidenceMatrix& SimplicialComplex::incidence_transposed(int k) const {
    if (k < 1 || k > order())
        throw OrderOutOfRangeError("incidence matrix B_" + std::to_string(k) +
                                   " does not exist for this complex");
    return incidence_t_[k - 1];
}

const HodgeTriple& SimplicialComplex::laplacians(int k) const {
    if (k < 0 || k > order())
        throw OrderOutOfRangeError("no Laplacian of order " + std::to_string(k));
    return laplacians_[k];
}

void SimplicialComplex::build_incidences() {
    int K = order();
    incidence_.reserve(K);
    for (int k = 1; k <= K; ++k) {
        const auto& faces = simplices_[k - 1];
        const auto& cells = simplices_[k];
        std::vector<std::vector<std::pair<std::size_t, std::int8_t>>> rows(faces.size());
        Simplex face;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const Simplex& s = cells[c];
            for (std::size_t omit = 0; omit < s.size(); ++omit) {
                face.clear();
                for (std::size_t i = 0; i < s.size(); ++i)
                    if (i != omit) face.push_back(s[i]);
                std::size_t r = index_of(k - 1, face);
                std::int8_t sign = (omit % 2 == 0) ? 1 : -1;
                rows[r].emplace_back(c, sign);
            }
        }
        IncidenceMatrix b;
        b.rows = faces.size();
        b.cols = cells.size();
        b.row_ptr.assign(faces.size() + 1, 0);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            // columns were visited in ascending order, so each row is sorted
            for (const auto& [c, sign] : rows[r]) {
                b.col_idx.push_back(c);
                b.coef.push_back(sign);
            }
            b.row_ptr[r + 1] = b.col_idx.size();
        }
        incidence_.push_back(std::move(b));
        incidence_t_.push_back(incidence_.back().transposed());
    }
}

void SimplicialComplex::build_laplacians() {
    int K = order();
    laplacians_.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
        HodgeTriple& t = laplacians_[k];
        if (k >= 1)
            t.lower = multiply_incidence(incidence_t_[k - 1], incidence_[k - 1]).value;
        if (k < K)
            t.upper = multiply_incidence(incidence_[k], incidence_t_[k]).value;
        if (t.lower && t.upper) {
            t.full = add_sparse(*t.lower, *t.upper);
        } else if (t.lower) {
            t.full = *t.lower;
        } else if (t.upper) {
            t.full = *t.upper;
        } else {
            t.full.rows = t.full.cols = simplices_[k].size();
            t.full.row_ptr.assign(t.full.rows + 1, 0);
        }
    }
}

std::vector<ChainCheck> SimplicialComplex::verify_chain_property() const {
    std::vector<ChainCheck> out;
    for (int k = 1; k + 1 <= order(); ++k) {
        auto prod = multiply_incidence(incidence_[k - 1], incidence_[k]);
        out.push_back({k, prod.max_abs});
    }
    return out;
}

SimplicialComplex build_complex(const std::vector<std::vector<Simplex>>& by_order) {
    int top = -1;
    for (std::size_t k = 0; k < by_order.size(); ++k)
        if (!by_order[k].empty()) top = static_cast<int>(k);
    if (top < 0) throw EmptyComplexError("complex has no simplices");

    // Normalize input: sort vertices, reject duplicates.
    std::vector<std::set<Simplex>> levels(top + 1);
    for (int k = 0; k <= top && k < static_cast<int>(by_order.size()); ++k) {
        for (const Simplex& raw : by_order[k]) {
            if (static_cast<int>(raw.size()) != k + 1)
                throw DimensionMismatchError(
                    "simplex " + simplex_to_string(raw) + " listed at order " + std::to_string(k));
            Simplex s = raw;
            std::sort(s.begin(), s.end());
            if (!s.empty() && s.front() < 0)
                throw ParseError("vertex ids must be non-negative in " + simplex_to_string(raw));
            if (std::adjacent_find(s.begin(), s.end()) != s.end())
                throw DuplicateVertexError("repeated vertex in simplex " + simplex_to_string(raw));
            if (!levels[k].insert(std::move(s)).second)
                throw DuplicateSimplexError("simplex " + simplex_to_string(raw) +
                                            " appears twice at order " + std::to_string(k));
        }
    }

    // Close downward: every face of a present simplex must be present.
    std::size_t inserted = 0;
    for (int k = top; k >= 1; --k) {
        Simplex face;
        for (const Simplex& s : levels[k]) {
            for (std::size_t omit = 0; omit < s.size(); ++omit) {
                face.clear();
                for (std::size_t i = 0; i < s.size(); ++i)
                    if (i != omit) face.push_back(s[i]);
                if (levels[k - 1].insert(face).second) ++inserted;
            }
        }
    }

    SimplicialComplex c;
    c.inserted_faces_ = inserted;
    c.simplices_.resize(top + 1);
    for (int k = 0; k <= top; ++k)
        c.simplices_[k].assign(levels[k].begin(), levels[k].end());
    c.build_incidences();
    c.build_laplacians();
    return c;
}

} // namespace splx
