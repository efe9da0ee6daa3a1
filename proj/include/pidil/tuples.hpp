// Tuples of partial isometries: relation checking, graph extraction,
// Wold decomposition into pure and fully coisometric parts, purity margins.
#pragma once

#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pidil/graph.hpp"
#include "pidil/numerics.hpp"

namespace pidil {

enum class TupleMode { exact, truncated };

// A tuple of equal-sized square operators. Truncated tuples model a Fock
// space cut at `depth`: levels[i] is the path length owning basis index i,
// with -1 reserved for an ambient block (a dilated space's original H).
// Verification of truncated tuples is compressed to ambient + levels <= depth-1,
// the region untouched by the cut.
struct OperatorTuple {
    int dim = 0;
    std::vector<Matrix> ops;
    TupleMode mode = TupleMode::exact;
    int depth = 0;
    std::vector<int> levels;

    std::vector<int> retained_indices() const {
        std::vector<int> keep;
        keep.reserve(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i)
            if (mode == TupleMode::exact || levels[static_cast<std::size_t>(i)] < 0 ||
                levels[static_cast<std::size_t>(i)] <= depth - 1)
                keep.push_back(i);
        return keep;
    }
};

inline OperatorTuple make_exact_tuple(std::vector<Matrix> ops) {
    if (ops.empty()) fail(errc::dimension_mismatch, "tuple needs at least one operator");
    const Index d = ops.front().rows();
    for (const Matrix& m : ops)
        if (m.rows() != d || m.cols() != d)
            fail(errc::dimension_mismatch, "tuple operators must be square and equal-sized");
    OperatorTuple t;
    t.dim = static_cast<int>(d);
    t.ops = std::move(ops);
    return t;
}

inline OperatorTuple make_truncated_tuple(std::vector<Matrix> ops, int depth,
                                          std::vector<int> levels) {
    OperatorTuple t = make_exact_tuple(std::move(ops));
    if (depth < 0) fail(errc::dimension_mismatch, "depth must be nonnegative");
    if (static_cast<int>(levels.size()) != t.dim)
        fail(errc::dimension_mismatch, "level index size must match dimension");
    for (int l : levels)
        if (l < -1 || l > depth) fail(errc::dimension_mismatch, "level out of range");
    t.mode = TupleMode::truncated;
    t.depth = depth;
    t.levels = std::move(levels);
    return t;
}

// Residuals of the five defining relations, the distinct initial projections
// and the per-operator (source, range) vertex labels extracted from them.
struct DaggerReport {
    bool verdict = false;
    double idempotent_residual = 0.0;        // (Q_i)^2 = Q_i
    double row_contraction_residual = 0.0;   // sum S_i S_i* <= I
    double equal_or_orthogonal_residual = 0.0; // distinct Q's multiply to zero
    double range_support_residual = 0.0;     // S_i S_i* <= some Q_k
    double partition_residual = 0.0;         // distinct Q's sum to I
    double min_op_norm = 0.0;
    std::vector<Matrix> initial_projections;
    std::vector<std::pair<int, int>> edge_labels;
    std::vector<int> ambiguous_ops;
    std::string failure;
};

inline DaggerReport check_dagger(const OperatorTuple& s, const ToleranceConfig& tol = {}) {
    tol.validate();
    const int n = static_cast<int>(s.ops.size());
    const std::vector<int> keep = s.retained_indices();
    DaggerReport rep;

    rep.min_op_norm = fro_norm(s.ops[0]);
    for (const Matrix& m : s.ops) rep.min_op_norm = std::min(rep.min_op_norm, fro_norm(m));

    std::vector<Matrix> q(static_cast<std::size_t>(n)), r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        q[static_cast<std::size_t>(i)] = s.ops[static_cast<std::size_t>(i)].adjoint() *
                                         s.ops[static_cast<std::size_t>(i)];
        r[static_cast<std::size_t>(i)] = s.ops[static_cast<std::size_t>(i)] *
                                         s.ops[static_cast<std::size_t>(i)].adjoint();
    }

    for (int i = 0; i < n; ++i) {
        const Matrix& qi = q[static_cast<std::size_t>(i)];
        rep.idempotent_residual =
            std::max(rep.idempotent_residual, fro_norm(compress(qi * qi - qi, keep)));
    }

    Matrix defect = Matrix::Identity(s.dim, s.dim);
    for (int i = 0; i < n; ++i) defect -= r[static_cast<std::size_t>(i)];
    rep.row_contraction_residual = std::max(0.0, -min_eigenvalue(compress(defect, keep)));

    // classify initial projections: pairwise equal or orthogonal
    std::vector<int> cls(static_cast<std::size_t>(n));
    std::iota(cls.begin(), cls.end(), 0);
    auto find = [&](int i) {
        while (cls[static_cast<std::size_t>(i)] != i) i = cls[static_cast<std::size_t>(i)];
        return i;
    };
    std::vector<std::vector<double>> d_eq(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double eq = fro_norm(
                compress(q[static_cast<std::size_t>(i)] - q[static_cast<std::size_t>(j)], keep));
            d_eq[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = eq;
            if (eq <= tol.eps_rank) cls[static_cast<std::size_t>(find(j))] = find(i);
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double eq = d_eq[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (find(i) == find(j)) {
                // merged through a chain: every pair inside a class must agree
                if (eq > tol.eps_rank)
                    rep.equal_or_orthogonal_residual =
                        std::max(rep.equal_or_orthogonal_residual, eq);
            } else {
                double orth = fro_norm(compress(
                    q[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(j)], keep));
                if (orth > tol.eps_rank)
                    rep.equal_or_orthogonal_residual =
                        std::max(rep.equal_or_orthogonal_residual, std::min(eq, orth));
            }
        }

    // distinct vertices in order of first appearance
    std::vector<int> rep_op; // class representative op per vertex
    std::vector<int> vertex_of(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        int root = find(i);
        if (vertex_of[static_cast<std::size_t>(root)] == -1) {
            vertex_of[static_cast<std::size_t>(root)] = static_cast<int>(rep_op.size());
            rep_op.push_back(i); // smallest op index in the class
        }
        vertex_of[static_cast<std::size_t>(i)] = vertex_of[static_cast<std::size_t>(root)];
    }
    const int k = static_cast<int>(rep_op.size());
    for (int v = 0; v < k; ++v)
        rep.initial_projections.push_back(q[static_cast<std::size_t>(rep_op[static_cast<std::size_t>(v)])]);

    Matrix partition = -Matrix::Identity(s.dim, s.dim);
    for (int v = 0; v < k; ++v) partition += rep.initial_projections[static_cast<std::size_t>(v)];
    rep.partition_residual = fro_norm(compress(partition, keep));

    // range support: S_i S_i* <= Q_v for exactly one vertex v
    rep.edge_labels.assign(static_cast<std::size_t>(n), {-1, -1});
    for (int i = 0; i < n; ++i) {
        rep.edge_labels[static_cast<std::size_t>(i)].first = vertex_of[static_cast<std::size_t>(i)];
        double best = -1.0;
        int best_v = -1, hits = 0;
        for (int v = 0; v < k; ++v) {
            const Matrix& qr = rep.initial_projections[static_cast<std::size_t>(v)];
            double res = fro_norm(
                compress(qr * r[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)], keep));
            if (res <= tol.eps_rank) ++hits;
            if (best < 0.0 || res < best) {
                best = res;
                best_v = v;
            }
        }
        rep.edge_labels[static_cast<std::size_t>(i)].second = best_v;
        rep.range_support_residual = std::max(rep.range_support_residual, best);
        if (hits > 1) rep.ambiguous_ops.push_back(i);
    }

    rep.verdict = rep.idempotent_residual <= tol.eps_rank &&
                  rep.row_contraction_residual <= tol.eps_rank &&
                  rep.equal_or_orthogonal_residual <= tol.eps_rank &&
                  rep.range_support_residual <= tol.eps_rank &&
                  rep.partition_residual <= tol.eps_rank && rep.min_op_norm > tol.eps_rank;
    if (!rep.verdict) {
        if (rep.min_op_norm <= tol.eps_rank) rep.failure = "tuple contains a zero operator";
        else if (rep.idempotent_residual > tol.eps_rank) rep.failure = "initial projections are not idempotent";
        else if (rep.row_contraction_residual > tol.eps_rank) rep.failure = "final projections exceed the identity";
        else if (rep.equal_or_orthogonal_residual > tol.eps_rank) rep.failure = "initial projections neither equal nor orthogonal";
        else if (rep.range_support_residual > tol.eps_rank) rep.failure = "a range escapes every initial projection";
        else rep.failure = "initial projections do not sum to the identity";
    }
    return rep;
}

/// Graph extracted from a verified tuple: one vertex per distinct initial
/// projection (order of first appearance), one edge per operator.
inline DirectedGraph extract_graph(const OperatorTuple& s, const ToleranceConfig& tol = {},
                                   DaggerReport* out_report = nullptr) {
    DaggerReport rep = check_dagger(s, tol);
    if (!rep.verdict) fail(errc::verification_failed, "extract_graph: " + rep.failure);
    if (!rep.ambiguous_ops.empty())
        fail(errc::ambiguous_support,
             "operator " + std::to_string(rep.ambiguous_ops.front()) +
                 " has a range dominated by several initial projections");
    DirectedGraph g;
    g.vertex_count = static_cast<int>(rep.initial_projections.size());
    for (auto [src, dst] : rep.edge_labels) g.edges.push_back(Edge{src, dst});
    g.validate();
    if (out_report) *out_report = std::move(rep);
    return g;
}

namespace detail {

// Basis of Ran(I - sum S_e S_e*) in compressed coordinates plus the keep map.
struct WanderingData {
    std::vector<int> keep;
    Matrix basis_compressed;
};

inline WanderingData wandering_compressed(const OperatorTuple& s, const ToleranceConfig& tol) {
    WanderingData w;
    w.keep = s.retained_indices();
    Matrix defect = Matrix::Identity(s.dim, s.dim);
    for (const Matrix& op : s.ops) defect -= op * op.adjoint();
    w.basis_compressed = hermitian_range_basis(compress(defect, w.keep), tol);
    return w;
}

inline Matrix embed_rows(const Matrix& compressed, const std::vector<int>& keep, int full_dim) {
    Matrix out = Matrix::Zero(full_dim, compressed.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) out.row(keep[i]) = compressed.row(static_cast<Index>(i));
    return out;
}

} // namespace detail

/// Orthonormal basis (full coordinates) of the wandering subspace
/// Ran(I - sum S_e S_e*), computed on the retained region for truncated tuples.
inline Matrix wandering_subspace(const OperatorTuple& s, const ToleranceConfig& tol = {}) {
    auto w = detail::wandering_compressed(s, tol);
    return detail::embed_rows(w.basis_compressed, w.keep, s.dim);
}

struct WoldDecomposition {
    DirectedGraph graph;
    std::vector<Matrix> initial_projections;
    Matrix wandering;          // basis of the wandering subspace
    Matrix pure_basis;         // basis of the span of all w(S)-translates of it
    Matrix coisometric_basis;  // basis of the orthogonal complement
    std::vector<int> alpha;    // rank of Q_k restricted to the wandering subspace
};

/// Splits the space into the part generated by the wandering subspace under
/// the tuple (pure part) and its complement (fully coisometric part).
inline WoldDecomposition wold_decompose(const OperatorTuple& s, const ToleranceConfig& tol = {}) {
    DaggerReport rep;
    WoldDecomposition wd;
    wd.graph = extract_graph(s, tol, &rep);
    wd.initial_projections = rep.initial_projections;

    auto w = detail::wandering_compressed(s, tol);
    wd.wandering = detail::embed_rows(w.basis_compressed, w.keep, s.dim);

    Matrix span = wd.wandering;
    for (int round = 0; round <= s.dim; ++round) {
        if (span.cols() == 0) break;
        Matrix grown(s.dim, span.cols() * static_cast<Index>(s.ops.size() + 1));
        grown.leftCols(span.cols()) = span;
        Index off = span.cols();
        for (const Matrix& op : s.ops) {
            grown.middleCols(off, span.cols()) = op * span;
            off += span.cols();
        }
        Matrix next = range_basis(grown, tol);
        if (next.cols() == span.cols()) {
            span = next;
            break;
        }
        span = next;
    }
    wd.pure_basis = span;
    wd.coisometric_basis = complement_basis(span, s.dim, tol);

    for (const Matrix& q : wd.initial_projections) {
        Matrix qc = compress(q, w.keep);
        wd.alpha.push_back(rank_tol(qc * w.basis_compressed, tol));
    }
    return wd;
}

/// sum S_e S_e* = I on the retained region.
inline bool is_fully_coisometric(const OperatorTuple& s, const ToleranceConfig& tol = {}) {
    Matrix defect = Matrix::Identity(s.dim, s.dim);
    for (const Matrix& op : s.ops) defect -= op * op.adjoint();
    return fro_norm(compress(defect, s.retained_indices())) <= tol.eps_rank;
}

/// Tail sums sum_{|w|=depth} ||w(ops)||_F^2 over composable words of the
/// graph (edge id = op id). Works for any tuple whose operators respect the
/// graph's source/range structure; paths are enumerated with the usual cap.
inline std::vector<double> tail_sums(const std::vector<Matrix>& ops, const DirectedGraph& g,
                                     const std::vector<int>& depths,
                                     std::size_t cap = default_path_cap) {
    if (ops.size() != g.edges.size())
        fail(errc::dimension_mismatch, "tail_sums: one operator per edge required");
    int dmax = 0;
    for (int d : depths) {
        if (d < 1) fail(errc::dimension_mismatch, "tail_sums: depths must be >= 1");
        dmax = std::max(dmax, d);
    }
    std::vector<double> sums(static_cast<std::size_t>(dmax) + 1, 0.0);
    std::vector<Path> paths = paths_up_to(g, dmax, cap);
    for (const Path& p : paths) {
        if (p.length() == 0) continue;
        Matrix prod = ops[static_cast<std::size_t>(p.edges.back())];
        for (auto it = std::next(p.edges.rbegin()); it != p.edges.rend(); ++it)
            prod = ops[static_cast<std::size_t>(*it)] * prod;
        double f = fro_norm(prod);
        sums[p.length()] += f * f;
    }
    std::vector<double> out;
    out.reserve(depths.size());
    for (int d : depths) out.push_back(sums[static_cast<std::size_t>(d)]);
    return out;
}

/// Tail sums of the tuple itself at the requested depths; the tuple must pass
/// check_dagger so the extracted graph governs composability.
inline std::vector<double> purity_margin(const OperatorTuple& s, const std::vector<int>& depths,
                                         const ToleranceConfig& tol = {},
                                         std::size_t cap = default_path_cap) {
    DirectedGraph g = extract_graph(s, tol);
    return tail_sums(s.ops, g, depths, cap);
}

} // namespace pidil
