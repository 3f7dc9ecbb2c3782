#pragma once

#include <optional>
#include <vector>

#include "splx/sparse.hpp"

namespace splx {

/// A k-simplex as its strictly ascending vertex id list (k+1 entries).
using Simplex = std::vector<int>;

/// The three Hodge Laplacian blocks of one order. The lower block
/// B_k^T B_k is absent at k = 0 and the upper block B_{k+1} B_{k+1}^T is
/// absent at the top order; `full` is the sum of whichever blocks exist
/// (the zero matrix for a vertex-only complex).
struct HodgeTriple {
    std::optional<SparseMatrix> lower;
    std::optional<SparseMatrix> upper;
    SparseMatrix full;
};

/// Result of the boundary-of-boundary check at one order: the largest
/// absolute entry of B_k * B_{k+1}, computed in exact integer arithmetic.
/// Zero for every valid complex.
struct ChainCheck {
    int k = 0;
    long long max_abs = 0;
};

/// Immutable simplicial complex. Simplices of each order are kept in
/// lexicographic order and indexed by position; incidence matrices and
/// Hodge Laplacians are built eagerly at construction, so a constructed
/// complex is safe to share read-only across threads.
class SimplicialComplex {
public:
    /// Highest order K present.
    int order() const { return static_cast<int>(simplices_.size()) - 1; }

    /// Number of k-simplices.
    std::size_t count(int k) const;

    const std::vector<Simplex>& simplices(int k) const;

    /// Position of a simplex in the canonical order, or npos if absent.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t index_of(int k, const Simplex& s) const;

    /// Signed incidence matrix B_k mapping k-simplices to their
    /// (k-1)-faces, 1 <= k <= K.
    const IncidenceMatrix& incidence(int k) const;
    const IncidenceMatrix& incidence_transposed(int k) const;

    const HodgeTriple& laplacians(int k) const;

    /// Faces that were missing from the input and inserted to close the
    /// complex.
    std::size_t inserted_face_count() const { return inserted_faces_; }

    /// Exact integer check that B_k * B_{k+1} = 0 for every applicable k.
    std::vector<ChainCheck> verify_chain_property() const;

    friend SimplicialComplex build_complex(const std::vector<std::vector<Simplex>>& by_order);

private:
    SimplicialComplex() = default;
    void build_incidences();
    void build_laplacians();

    std::vector<std::vector<Simplex>> simplices_; // [k][i]
    std::vector<IncidenceMatrix> incidence_;      // [k-1] holds B_k
    std::vector<IncidenceMatrix> incidence_t_;
    std::vector<HodgeTriple> laplacians_;         // [k]
    std::size_t inserted_faces_ = 0;
};

/// Build a complex from per-order simplex lists (index = order). Vertex
/// lists may arrive unsorted; they are sorted ascending. Missing faces are
/// inserted automatically. Throws DuplicateVertexError, DuplicateSimplexError
/// or EmptyComplexError on invalid input.
SimplicialComplex build_complex(const std::vector<std::vector<Simplex>>& by_order);

} // namespace splx
