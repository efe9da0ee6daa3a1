// Minimal partially isometric dilations of stabilized row contractions on a
// depth-truncated graph Fock space, plus the canonical shift and predictions.
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pidil/families.hpp"
#include "pidil/tuples.hpp"

namespace pidil {

namespace detail {

// Coordinate layout of the Fock part: one slot per path, slot width = defect
// dimension of the path's initial vertex, paths in canonical order.
struct SlotTable {
    std::vector<Path> paths;
    std::vector<int> offset; // first coordinate of each slot (ambient included)
    std::vector<int> width;
    std::vector<int> levels; // per coordinate; ambient block first, marked -1
    int ambient = 0;
    int total = 0; // ambient + all slot widths
    std::map<std::pair<int, std::vector<int>>, int> lookup; // (src, edges) -> path idx

    int prepend(int edge, int path_idx, const DirectedGraph& g) const {
        const Path& w = paths[static_cast<std::size_t>(path_idx)];
        std::vector<int> seq;
        seq.reserve(w.edges.size() + 1);
        seq.push_back(edge);
        seq.insert(seq.end(), w.edges.begin(), w.edges.end());
        (void)g;
        return lookup.at({w.src, seq});
    }
};

inline SlotTable build_slots(const DirectedGraph& g, const std::vector<int>& block_dims,
                             int depth, int ambient, std::size_t cap) {
    if (static_cast<int>(block_dims.size()) != g.vertex_count)
        fail(errc::dimension_mismatch, "one block dimension per vertex required");
    bool positive = false;
    for (int d : block_dims) {
        if (d < 0) fail(errc::dimension_mismatch, "block dimensions must be nonnegative");
        if (d > 0) positive = true;
    }
    SlotTable t;
    t.ambient = ambient;
    t.total = ambient;
    t.levels.assign(static_cast<std::size_t>(ambient), -1);
    t.paths = paths_up_to(g, depth, cap);
    if (ambient == 0 && !positive)
        fail(errc::dimension_mismatch, "at least one block dimension must be positive");
    t.offset.reserve(t.paths.size());
    t.width.reserve(t.paths.size());
    for (std::size_t i = 0; i < t.paths.size(); ++i) {
        const Path& p = t.paths[i];
        t.lookup[{p.src, p.edges}] = static_cast<int>(i);
        t.offset.push_back(t.total);
        int w = block_dims[static_cast<std::size_t>(p.src)];
        t.width.push_back(w);
        t.total += w;
        for (int j = 0; j < w; ++j) t.levels.push_back(static_cast<int>(p.length()));
    }
    return t;
}

} // namespace detail

/// Truncated shift tuple on the graph Fock space with the given coordinate
/// block dimensions: L_e moves the slot of w to the slot of ew when composable
/// and |w| < depth, and annihilates the top level.
inline OperatorTuple canonical_shift(const DirectedGraph& g, const std::vector<int>& block_dims,
                                     int depth, std::size_t cap = default_path_cap) {
    g.validate();
    if (depth < 0) fail(errc::dimension_mismatch, "depth must be nonnegative");
    detail::SlotTable slots = detail::build_slots(g, block_dims, depth, 0, cap);

    std::vector<Matrix> ops;
    ops.reserve(g.edges.size());
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
        Matrix m = Matrix::Zero(slots.total, slots.total);
        for (std::size_t w = 0; w < slots.paths.size(); ++w) {
            const Path& p = slots.paths[w];
            if (static_cast<int>(p.length()) >= depth) continue;
            if (g.edges[static_cast<std::size_t>(e)].src != p.dst) continue;
            int child = slots.prepend(e, static_cast<int>(w), g);
            for (int j = 0; j < slots.width[w]; ++j)
                m(slots.offset[static_cast<std::size_t>(child)] + j, slots.offset[w] + j) = 1.0;
        }
        ops.push_back(std::move(m));
    }
    return make_truncated_tuple(std::move(ops), depth, slots.levels);
}

// Defect operator of a stabilized row contraction, split into the blocks
// D_e = D E_e and the per-vertex defect subspaces spanned by ranges with a
// common range vertex.
struct DefectData {
    DirectedGraph graph;
    std::vector<std::pair<int, int>> labels; // per op: (source, range) vertex
    Matrix d;                                // psd sqrt of I_P - T*T on H^(n)
    std::vector<Matrix> d_e;
    std::vector<Matrix> block_basis; // orthonormal basis of each defect block
    std::vector<int> block_dims;
    double proof_identity_residual = 0.0; // T_e*T_f + D_e*D_f - delta P_{s(e)}
    double lemma_overlap = 0.0;           // cross-vertex block overlap
};

inline DefectData defect(const RowContraction& t, const ProjectionFamily& p,
                         const ToleranceConfig& tol = {}) {
    tol.validate();
    DefectData dd;
    dd.graph = family_graph(t, p, tol, &dd.labels);
    if (!is_row_contraction(t, tol))
        fail(errc::not_psd, "operators do not form a row contraction");

    const int n = static_cast<int>(t.ops.size());
    const int h = t.dim;
    Matrix a = Matrix::Zero(static_cast<Index>(n) * h, static_cast<Index>(n) * h);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Matrix blk = -(t.ops[static_cast<std::size_t>(i)].adjoint() *
                           t.ops[static_cast<std::size_t>(j)]);
            if (i == j)
                blk += p.projections[static_cast<std::size_t>(
                    dd.labels[static_cast<std::size_t>(i)].first)];
            a.block(static_cast<Index>(i) * h, static_cast<Index>(j) * h, h, h) = blk;
        }
    }
    // the blocks of `a` are differences of unit-scale terms, so an exactly
    // vanishing defect must floor its rounding noise at that scale
    dd.d = psd_sqrt(a, tol, 1.0);
    for (int e = 0; e < n; ++e) dd.d_e.push_back(dd.d.middleCols(static_cast<Index>(e) * h, h));

    for (int k = 0; k < dd.graph.vertex_count; ++k) {
        std::vector<int> incoming;
        for (int e = 0; e < n; ++e)
            if (dd.labels[static_cast<std::size_t>(e)].second == k) incoming.push_back(e);
        Matrix stacked(static_cast<Index>(n) * h, static_cast<Index>(incoming.size()) * h);
        for (std::size_t c = 0; c < incoming.size(); ++c)
            stacked.middleCols(static_cast<Index>(c) * h, h) =
                dd.d_e[static_cast<std::size_t>(incoming[c])];
        Matrix basis = incoming.empty() ? Matrix(static_cast<Index>(n) * h, 0)
                                        : range_basis(stacked, tol);
        dd.block_dims.push_back(static_cast<int>(basis.cols()));
        dd.block_basis.push_back(std::move(basis));
    }

    for (int k = 0; k < dd.graph.vertex_count; ++k)
        for (int l = k + 1; l < dd.graph.vertex_count; ++l)
            dd.lemma_overlap = std::max(
                dd.lemma_overlap, subspace_overlap(dd.block_basis[static_cast<std::size_t>(k)],
                                                   dd.block_basis[static_cast<std::size_t>(l)]));
    if (dd.lemma_overlap > tol.eps_rank)
        fail(errc::lemma_violation, "defect blocks with distinct range vertices overlap");
    int total = 0;
    for (int w : dd.block_dims) total += w;
    if (total != rank_tol(dd.d, tol))
        fail(errc::lemma_violation, "defect blocks do not decompose the defect space");

    for (int e = 0; e < n; ++e)
        for (int f = 0; f < n; ++f) {
            Matrix res = t.ops[static_cast<std::size_t>(e)].adjoint() *
                             t.ops[static_cast<std::size_t>(f)] +
                         dd.d_e[static_cast<std::size_t>(e)].adjoint() *
                             dd.d_e[static_cast<std::size_t>(f)];
            if (e == f)
                res -= p.projections[static_cast<std::size_t>(
                    dd.labels[static_cast<std::size_t>(e)].first)];
            dd.proof_identity_residual = std::max(dd.proof_identity_residual, fro_norm(res));
        }
    return dd;
}

struct BasisSlot {
    Path path;
    int j = 0;     // coordinate inside the defect block
    int coord = 0; // column index in the dilated space
};

struct DilationReport {
    DaggerReport dagger;
    double compression_residual = 0.0;        // P_H S_e|_H = T_e
    double adjoint_invariance_residual = 0.0; // S_e* maps H into H, as T_e*
    double initial_projection_residual = 0.0; // S_e*S_e|_H = P_{s(e)}
    double minimality_defect = 0.0;           // levels <= d-1 lie in the generated span
    double proof_identity_residual = 0.0;
    std::vector<int> defect_dims;
    bool verdict = false;
};

struct DilationResult {
    OperatorTuple tuple;
    int embed_lo = 0, embed_hi = 0;
    int depth = 0;
    DirectedGraph graph;
    ProjectionFamily family;
    std::vector<BasisSlot> basis_index;
    DilationReport report;
};

namespace detail {

// Assembly from precomputed defect data; the block bases are an input so the
// uniqueness tests can rotate them.
inline DilationResult assemble_dilation(const RowContraction& t, const ProjectionFamily& p,
                                        int depth, const DefectData& dd,
                                        const ToleranceConfig& tol,
                                        std::size_t cap = default_path_cap) {
    if (depth < 1) fail(errc::dimension_mismatch, "depth must be at least 1");
    const int n = static_cast<int>(t.ops.size());
    const int h = t.dim;
    SlotTable slots = build_slots(dd.graph, dd.block_dims, depth, h, cap);
    const int big = slots.total;

    DilationResult res;
    res.depth = depth;
    res.graph = dd.graph;
    res.family = p;
    res.embed_lo = 0;
    res.embed_hi = h;

    std::vector<Matrix> ops;
    ops.reserve(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) {
        Matrix m = Matrix::Zero(big, big);
        m.topLeftCorner(h, h) = t.ops[static_cast<std::size_t>(e)];
        const int rv = dd.labels[static_cast<std::size_t>(e)].second;
        const Matrix coeff = dd.block_basis[static_cast<std::size_t>(rv)].adjoint() *
                             dd.d_e[static_cast<std::size_t>(e)];
        m.block(slots.offset[static_cast<std::size_t>(rv)], 0, coeff.rows(), h) = coeff;
        for (std::size_t w = 0; w < slots.paths.size(); ++w) {
            const Path& path = slots.paths[w];
            if (static_cast<int>(path.length()) >= depth) continue;
            if (dd.graph.edges[static_cast<std::size_t>(e)].src != path.dst) continue;
            int child = slots.prepend(e, static_cast<int>(w), dd.graph);
            for (int j = 0; j < slots.width[w]; ++j)
                m(slots.offset[static_cast<std::size_t>(child)] + j, slots.offset[w] + j) = 1.0;
        }
        ops.push_back(std::move(m));
    }
    res.tuple = make_truncated_tuple(std::move(ops), depth, slots.levels);

    for (std::size_t w = 0; w < slots.paths.size(); ++w)
        for (int j = 0; j < slots.width[w]; ++j)
            res.basis_index.push_back(BasisSlot{slots.paths[w], j, slots.offset[w] + j});

    // verification against the compression / invariance / minimality contract
    DilationReport& rep = res.report;
    rep.dagger = check_dagger(res.tuple, tol);
    rep.proof_identity_residual = dd.proof_identity_residual;
    rep.defect_dims = dd.block_dims;
    for (int e = 0; e < n; ++e) {
        const Matrix& m = res.tuple.ops[static_cast<std::size_t>(e)];
        rep.compression_residual =
            std::max(rep.compression_residual,
                     fro_norm(m.topLeftCorner(h, h) - t.ops[static_cast<std::size_t>(e)]));
        rep.adjoint_invariance_residual =
            std::max(rep.adjoint_invariance_residual, fro_norm(m.topRightCorner(h, big - h)));
        Matrix q = m.adjoint() * m;
        rep.initial_projection_residual =
            std::max(rep.initial_projection_residual,
                     fro_norm(q.topLeftCorner(h, h) -
                              p.projections[static_cast<std::size_t>(
                                  dd.labels[static_cast<std::size_t>(e)].first)]));
    }

    Matrix span = Matrix::Zero(big, h);
    span.topLeftCorner(h, h) = Matrix::Identity(h, h);
    for (int round = 0; round < depth; ++round) {
        Matrix grown(big, span.cols() * static_cast<Index>(n + 1));
        grown.leftCols(span.cols()) = span;
        Index off = span.cols();
        for (const Matrix& m : res.tuple.ops) {
            grown.middleCols(off, span.cols()) = m * span;
            off += span.cols();
        }
        span = range_basis(grown, tol);
    }
    const Matrix span_proj = span * span.adjoint();
    for (int c = h; c < big; ++c) {
        if (res.tuple.levels[static_cast<std::size_t>(c)] > depth - 1) continue;
        Vector r = -span_proj.col(c);
        r(c) += 1.0;
        rep.minimality_defect = std::max(rep.minimality_defect, r.norm());
    }

    rep.verdict = rep.dagger.verdict && rep.compression_residual <= tol.eps_rank &&
                  rep.adjoint_invariance_residual <= tol.eps_rank &&
                  rep.initial_projection_residual <= tol.eps_rank &&
                  rep.minimality_defect <= tol.eps_rank &&
                  rep.proof_identity_residual <= tol.eps_rank;
    return res;
}

} // namespace detail

/// Minimal partially isometric dilation of (T, P) truncated at `depth`.
/// Throws VerificationFailed when the constructed tuple misses its contract.
inline DilationResult dilate(const RowContraction& t, const ProjectionFamily& p, int depth,
                             const ToleranceConfig& tol = {},
                             std::size_t cap = default_path_cap) {
    DefectData dd = defect(t, p, tol);
    DilationResult res = detail::assemble_dilation(t, p, depth, dd, tol, cap);
    if (!res.report.verdict) {
        std::string what = "dilation verification failed: ";
        const DilationReport& r = res.report;
        if (!r.dagger.verdict) what += "tuple relations (" + r.dagger.failure + ")";
        else if (r.compression_residual > tol.eps_rank) what += "compression onto H";
        else if (r.adjoint_invariance_residual > tol.eps_rank) what += "adjoint invariance of H";
        else if (r.initial_projection_residual > tol.eps_rank) what += "initial projections over H";
        else if (r.minimality_defect > tol.eps_rank) what += "minimality of the generated span";
        else what += "defect identity";
        fail(errc::verification_failed, what);
    }
    return res;
}

struct UniquenessReport {
    double gram_defect = 0.0;          // generation vectors: Gram matrix mismatch
    double intertwining_residual = 0.0; // U S_e vs S_e' U on the retained region
    double embedding_residual = 0.0;    // U restricted to H vs the identity
    int span_rank = 0;
};

/// Constructive uniqueness surrogate: Gram-Schmidt the spanning vectors
/// w(S) h (words up to the depth, H first) of both dilations with shared
/// acceptance decisions and compare the induced unitary.
inline UniquenessReport verify_uniqueness(const RowContraction& t, const ProjectionFamily& p,
                                          int depth, const DilationResult& a,
                                          const DilationResult& b,
                                          const ToleranceConfig& tol = {},
                                          std::size_t cap = default_path_cap) {
    if (a.depth != depth || b.depth != depth)
        fail(errc::span_mismatch, "dilations were built at different depths");
    if (a.embed_hi - a.embed_lo != t.dim || b.embed_hi - b.embed_lo != t.dim)
        fail(errc::span_mismatch, "embedded spaces do not match the contraction");
    if (!(a.graph == b.graph))
        fail(errc::span_mismatch, "dilations live over different graphs");
    (void)p;

    const int h = t.dim;
    const Index na = a.tuple.dim, nb = b.tuple.dim;
    std::vector<Path> words = paths_up_to(a.graph, depth, cap);

    std::vector<Vector> va, vb;
    Matrix embed_a = Matrix::Zero(na, h), embed_b = Matrix::Zero(nb, h);
    embed_a.topLeftCorner(h, h) = Matrix::Identity(h, h);
    embed_b.topLeftCorner(h, h) = Matrix::Identity(h, h);
    for (int i = 0; i < h; ++i) {
        va.push_back(embed_a.col(i));
        vb.push_back(embed_b.col(i));
    }
    for (const Path& w : words) {
        if (w.length() == 0) continue;
        Matrix prod_a = embed_a, prod_b = embed_b;
        for (auto it = w.edges.rbegin(); it != w.edges.rend(); ++it) {
            prod_a = a.tuple.ops[static_cast<std::size_t>(*it)] * prod_a;
            prod_b = b.tuple.ops[static_cast<std::size_t>(*it)] * prod_b;
        }
        for (int i = 0; i < h; ++i) {
            va.push_back(prod_a.col(i));
            vb.push_back(prod_b.col(i));
        }
    }

    UniquenessReport rep;
    for (std::size_t s = 0; s < va.size(); ++s)
        for (std::size_t u = s; u < va.size(); ++u)
            rep.gram_defect =
                std::max(rep.gram_defect, std::abs(va[s].dot(va[u]) - vb[s].dot(vb[u])));

    std::vector<Vector> ua, ub;
    for (std::size_t s = 0; s < va.size(); ++s) {
        Vector ra = va[s], rb = vb[s];
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t q = 0; q < ua.size(); ++q) {
                ra -= ua[q] * ua[q].dot(ra);
                rb -= ub[q] * ub[q].dot(rb);
            }
        const double norm_a = ra.norm(), norm_b = rb.norm();
        const bool keep_a = norm_a > tol.eps_rank, keep_b = norm_b > tol.eps_rank;
        if (keep_a != keep_b)
            fail(errc::span_mismatch, "spanning sets disagree at generation step " +
                                          std::to_string(s));
        if (!keep_a) continue;
        ua.push_back(ra / norm_a);
        ub.push_back(rb / norm_b);
    }
    rep.span_rank = static_cast<int>(ua.size());

    Matrix u = Matrix::Zero(nb, na);
    for (std::size_t q = 0; q < ua.size(); ++q) u += ub[q] * ua[q].adjoint();

    const std::vector<int> keep_a_idx = a.tuple.retained_indices();
    const std::vector<int> keep_b_idx = b.tuple.retained_indices();
    for (std::size_t e = 0; e < t.ops.size(); ++e) {
        Matrix r = u * a.tuple.ops[e] - b.tuple.ops[e] * u;
        Matrix rc(static_cast<Index>(keep_b_idx.size()), static_cast<Index>(keep_a_idx.size()));
        for (std::size_t i = 0; i < keep_b_idx.size(); ++i)
            for (std::size_t j = 0; j < keep_a_idx.size(); ++j)
                rc(static_cast<Index>(i), static_cast<Index>(j)) = r(keep_b_idx[i], keep_a_idx[j]);
        rep.intertwining_residual = std::max(rep.intertwining_residual, fro_norm(rc));
    }
    rep.embedding_residual = fro_norm(u.topLeftCorner(h, h) - Matrix::Identity(h, h));
    return rep;
}

struct Prediction {
    double r_norm = 0.0;   // lambda_max of sum T_e T_e*
    bool pure_by_bound = false;
    std::vector<double> tail; // tail sums at depths 1..tail_depth
    bool pure_by_tail = false;
    bool pure = false;
    bool fully_coisometric = false;
    std::vector<int> alpha; // predicted wandering multiplicities per vertex
};

/// Forecast of the dilation's Wold structure straight from (T, P): purity via
/// the strict row bound or decaying tail sums, full coisometry, and the
/// wandering ranks P_k (I - sum T_e T_e*).
inline Prediction predict_properties(const RowContraction& t, const ProjectionFamily& p,
                                     const ToleranceConfig& tol = {}, int tail_depth = 6,
                                     std::size_t cap = default_path_cap) {
    std::vector<std::pair<int, int>> labels;
    DirectedGraph g = family_graph(t, p, tol, &labels);
    Prediction pred;
    Matrix sum = Matrix::Zero(t.dim, t.dim);
    for (const Matrix& m : t.ops) sum += m * m.adjoint();
    pred.r_norm = std::max(0.0, max_eigenvalue(sum));
    pred.pure_by_bound = pred.r_norm < 1.0 - tol.eps_rank;
    std::vector<int> depths;
    for (int d = 1; d <= tail_depth; ++d) depths.push_back(d);
    pred.tail = tail_sums(t.ops, g, depths, cap);
    pred.pure_by_tail = !pred.tail.empty() && pred.tail.back() <= tol.eps_rank;
    pred.pure = pred.pure_by_bound || pred.pure_by_tail;
    Matrix defect_h = Matrix::Identity(t.dim, t.dim) - sum;
    pred.fully_coisometric = fro_norm(defect_h) <= tol.eps_rank;
    for (const Matrix& q : p.projections) pred.alpha.push_back(rank_tol(q * defect_h, tol));
    return pred;
}

} // namespace pidil
