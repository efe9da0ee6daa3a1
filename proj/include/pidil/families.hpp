// Stabilizing projection families for a row contraction: validation, the
// finest family, the coarsening poset and its graphs.
#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pidil/graph.hpp"
#include "pidil/numerics.hpp"

namespace pidil {

struct RowContraction {
    int dim = 0;
    std::vector<Matrix> ops;
};

inline RowContraction make_row_contraction(std::vector<Matrix> ops) {
    if (ops.empty()) fail(errc::dimension_mismatch, "row contraction needs at least one operator");
    const Index d = ops.front().rows();
    for (const Matrix& m : ops)
        if (m.rows() != d || m.cols() != d)
            fail(errc::dimension_mismatch, "operators must be square and equal-sized");
    return RowContraction{static_cast<int>(d), std::move(ops)};
}

/// lambda_max(sum T_i T_i* - I) <= eps_rank and every T_i nonzero.
inline bool is_row_contraction(const RowContraction& t, const ToleranceConfig& tol = {}) {
    Matrix sum = Matrix::Zero(t.dim, t.dim);
    for (const Matrix& m : t.ops) {
        if (fro_norm(m) <= tol.eps_rank) return false;
        sum += m * m.adjoint();
    }
    return max_eigenvalue(sum - Matrix::Identity(t.dim, t.dim)) <= tol.eps_rank;
}

/// Ranges and co-ranges of the operators jointly span the whole space.
inline bool is_normalized(const RowContraction& t, const ToleranceConfig& tol = {}) {
    Matrix stacked(t.dim, static_cast<Index>(2 * t.ops.size()) * t.dim);
    Index off = 0;
    for (const Matrix& m : t.ops) {
        stacked.middleCols(off, t.dim) = m;
        stacked.middleCols(off + t.dim, t.dim) = m.adjoint();
        off += 2 * t.dim;
    }
    return rank_tol(stacked, tol) == t.dim;
}

struct ProjectionFamily {
    std::vector<Matrix> projections;
};

struct FamilyValidation {
    bool valid = false;
    std::optional<errc> failure;
    std::string detail;
    std::vector<std::pair<int, int>> edge_labels; // per op: (source block, range block)
    double partition_residual = 0.0;
    double stabilizing_residual = 0.0;
};

/// Checks that P partitions the identity and stabilizes T: every P_k T_i and
/// T_i P_k equals T_i or 0, each operator has exactly one source and one range
/// block, and no block is annihilated by all operators.
inline FamilyValidation validate_family(const RowContraction& t, const ProjectionFamily& p,
                                        const ToleranceConfig& tol = {}) {
    tol.validate();
    FamilyValidation v;
    const int n = static_cast<int>(t.ops.size());
    const int k = static_cast<int>(p.projections.size());
    if (k == 0) {
        v.failure = errc::not_a_partition;
        v.detail = "family is empty";
        return v;
    }
    for (const Matrix& q : p.projections)
        if (q.rows() != t.dim || q.cols() != t.dim) {
            v.failure = errc::dimension_mismatch;
            v.detail = "projection shape does not match the space";
            return v;
        }

    Matrix sum = Matrix::Zero(t.dim, t.dim);
    for (int a = 0; a < k; ++a) {
        const Matrix& q = p.projections[static_cast<std::size_t>(a)];
        double herm = fro_norm(q - q.adjoint());
        double idem = fro_norm(q * q - q);
        if (herm > tol.eps_rel * std::max(1.0, fro_norm(q)) || idem > tol.eps_rank) {
            v.failure = errc::not_a_partition;
            v.detail = "member " + std::to_string(a) + " is not a projection";
            return v;
        }
        sum += q;
        for (int b = a + 1; b < k; ++b) {
            double cross = fro_norm(q * p.projections[static_cast<std::size_t>(b)]);
            v.partition_residual = std::max(v.partition_residual, cross);
        }
    }
    v.partition_residual =
        std::max(v.partition_residual, fro_norm(sum - Matrix::Identity(t.dim, t.dim)));
    if (v.partition_residual > tol.eps_rank) {
        v.failure = errc::not_a_partition;
        v.detail = "projections do not partition the identity";
        return v;
    }

    v.edge_labels.assign(static_cast<std::size_t>(n), {-1, -1});
    for (int i = 0; i < n; ++i) {
        const Matrix& ti = t.ops[static_cast<std::size_t>(i)];
        const double scale = tol.eps_rank * (1.0 + fro_norm(ti));
        for (int a = 0; a < k; ++a) {
            const Matrix& q = p.projections[static_cast<std::size_t>(a)];
            Matrix left = q * ti;
            Matrix right = ti * q;
            double l_keep = fro_norm(left - ti), l_kill = fro_norm(left);
            double r_keep = fro_norm(right - ti), r_kill = fro_norm(right);
            if (std::min(l_keep, l_kill) > scale || std::min(r_keep, r_kill) > scale) {
                v.failure = errc::not_stabilizing;
                v.detail = "block " + std::to_string(a) + " does not stabilize operator " +
                           std::to_string(i);
                v.stabilizing_residual = std::max({l_keep > scale ? std::min(l_keep, l_kill) : 0.0,
                                                   r_keep > scale ? std::min(r_keep, r_kill) : 0.0,
                                                   v.stabilizing_residual});
                return v;
            }
            v.stabilizing_residual = std::max(
                {v.stabilizing_residual, std::min(l_keep, l_kill), std::min(r_keep, r_kill)});
            if (l_keep <= scale && l_kill > scale) {
                if (v.edge_labels[static_cast<std::size_t>(i)].second != -1) {
                    v.failure = errc::not_stabilizing;
                    v.detail = "operator " + std::to_string(i) + " has two range blocks";
                    return v;
                }
                v.edge_labels[static_cast<std::size_t>(i)].second = a;
            }
            if (r_keep <= scale && r_kill > scale) {
                if (v.edge_labels[static_cast<std::size_t>(i)].first != -1) {
                    v.failure = errc::not_stabilizing;
                    v.detail = "operator " + std::to_string(i) + " has two source blocks";
                    return v;
                }
                v.edge_labels[static_cast<std::size_t>(i)].first = a;
            }
        }
        if (v.edge_labels[static_cast<std::size_t>(i)].first == -1 ||
            v.edge_labels[static_cast<std::size_t>(i)].second == -1) {
            v.failure = errc::not_stabilizing;
            v.detail = "operator " + std::to_string(i) + " vanishes on every block";
            return v;
        }
    }

    for (int a = 0; a < k; ++a) {
        bool hit = false;
        for (int i = 0; i < n; ++i)
            if (v.edge_labels[static_cast<std::size_t>(i)].first == a) hit = true;
        if (!hit) {
            v.failure = errc::annihilated_block;
            v.detail = "block " + std::to_string(a) + " is annihilated by every operator";
            return v;
        }
    }
    v.valid = true;
    return v;
}

inline void require_valid_family(const RowContraction& t, const ProjectionFamily& p,
                                 const ToleranceConfig& tol, FamilyValidation* out = nullptr) {
    FamilyValidation v = validate_family(t, p, tol);
    if (!v.valid) fail(*v.failure, v.detail);
    if (out) *out = std::move(v);
}

namespace detail {

// Canonical family order: by least standard-basis index carrying mass, then
// lexicographically by exact column-norm sequences (deterministic and safe).
inline void canonical_family_order(std::vector<Matrix>& blocks, const ToleranceConfig& tol) {
    auto lead = [&](const Matrix& q) {
        for (Index j = 0; j < q.cols(); ++j)
            if (q.col(j).norm() > tol.eps_rank) return j;
        return q.cols();
    };
    std::stable_sort(blocks.begin(), blocks.end(), [&](const Matrix& a, const Matrix& b) {
        Index la = lead(a), lb = lead(b);
        if (la != lb) return la < lb;
        for (Index j = 0; j < a.cols(); ++j) {
            double na = a.col(j).norm(), nb = b.col(j).norm();
            if (na != nb) return na > nb;
        }
        return false;
    });
}

} // namespace detail

/// The maximally refined stabilizing partition: connected components of all
/// ranges and co-ranges under non-orthogonality. Requires the normalization
/// predicate (component spans must exhaust the space).
inline ProjectionFamily finest_family(const RowContraction& t, const ToleranceConfig& tol = {}) {
    tol.validate();
    if (!is_normalized(t, tol))
        fail(errc::normalization_failed, "ranges and co-ranges do not span the space");
    const int n = static_cast<int>(t.ops.size());
    std::vector<Matrix> bases;
    bases.reserve(static_cast<std::size_t>(2 * n));
    for (const Matrix& m : t.ops) {
        bases.push_back(range_basis(m, tol));
        bases.push_back(range_basis(m.adjoint(), tol));
    }
    std::vector<int> comp(bases.size());
    std::iota(comp.begin(), comp.end(), 0);
    auto find = [&](int i) {
        while (comp[static_cast<std::size_t>(i)] != i) i = comp[static_cast<std::size_t>(i)];
        return i;
    };
    for (std::size_t i = 0; i < bases.size(); ++i)
        for (std::size_t j = i + 1; j < bases.size(); ++j)
            if (!subspaces_orthogonal(bases[i], bases[j], tol))
                comp[static_cast<std::size_t>(find(static_cast<int>(j)))] =
                    find(static_cast<int>(i));

    std::vector<int> roots;
    std::vector<Matrix> blocks;
    for (std::size_t i = 0; i < bases.size(); ++i) {
        int r = find(static_cast<int>(i));
        auto it = std::find(roots.begin(), roots.end(), r);
        std::size_t slot;
        if (it == roots.end()) {
            roots.push_back(r);
            blocks.emplace_back(t.dim, 0);
            slot = blocks.size() - 1;
        } else {
            slot = static_cast<std::size_t>(it - roots.begin());
        }
        Matrix widened(t.dim, blocks[slot].cols() + bases[i].cols());
        if (blocks[slot].cols() > 0) widened.leftCols(blocks[slot].cols()) = blocks[slot];
        if (bases[i].cols() > 0) widened.rightCols(bases[i].cols()) = bases[i];
        blocks[slot] = widened;
    }

    std::vector<Matrix> projections;
    Index total = 0;
    for (Matrix& b : blocks) {
        Matrix basis = range_basis(b, tol);
        total += basis.cols();
        projections.push_back(hermitian_part(basis * basis.adjoint()));
    }
    if (total != t.dim)
        fail(errc::normalization_failed, "component spans do not sum to the space");
    detail::canonical_family_order(projections, tol);
    return ProjectionFamily{std::move(projections)};
}

/// Graph of a validated family: one vertex per block (family order), one edge
/// per operator from its source block to its range block.
inline DirectedGraph family_graph(const RowContraction& t, const ProjectionFamily& p,
                                  const ToleranceConfig& tol = {},
                                  std::vector<std::pair<int, int>>* out_labels = nullptr) {
    FamilyValidation v;
    require_valid_family(t, p, tol, &v);
    DirectedGraph g;
    g.vertex_count = static_cast<int>(p.projections.size());
    for (auto [src, dst] : v.edge_labels) g.edges.push_back(Edge{src, dst});
    g.validate();
    if (out_labels) *out_labels = std::move(v.edge_labels);
    return g;
}

/// Largest commutator norm between members of the two families.
inline double commute_check(const ProjectionFamily& a, const ProjectionFamily& b) {
    double worst = 0.0;
    for (const Matrix& p : a.projections)
        for (const Matrix& q : b.projections) {
            require_same_shape(p, q, "commute_check");
            worst = std::max(worst, fro_norm(p * q - q * p));
        }
    return worst;
}

/// Common refinement: all nonzero products P*Q. The families must commute
/// (guaranteed for stabilizing families of one normalized contraction).
inline ProjectionFamily join(const ProjectionFamily& a, const ProjectionFamily& b,
                             const ToleranceConfig& tol = {}) {
    if (commute_check(a, b) > tol.eps_rank)
        fail(errc::non_commuting_families, "families do not commute");
    std::vector<Matrix> blocks;
    for (const Matrix& p : a.projections)
        for (const Matrix& q : b.projections) {
            Matrix prod = p * q;
            if (fro_norm(prod) <= tol.eps_rank) continue;
            blocks.push_back(nearest_projection(prod));
        }
    detail::canonical_family_order(blocks, tol);
    return ProjectionFamily{std::move(blocks)};
}

/// True when every member of `coarse` is a sum of members of `fine`.
/// Optionally reports which fine blocks compose each coarse block.
inline bool leq(const ProjectionFamily& coarse, const ProjectionFamily& fine,
                const ToleranceConfig& tol = {},
                std::vector<std::vector<int>>* out_groups = nullptr) {
    std::vector<std::vector<int>> groups(coarse.projections.size());
    std::vector<char> used(fine.projections.size(), 0);
    for (std::size_t c = 0; c < coarse.projections.size(); ++c) {
        const Matrix& p = coarse.projections[c];
        Matrix sum = Matrix::Zero(p.rows(), p.cols());
        for (std::size_t f = 0; f < fine.projections.size(); ++f) {
            const Matrix& q = fine.projections[f];
            require_same_shape(p, q, "leq");
            if (fro_norm(p * q - q) <= tol.eps_rank * (1.0 + fro_norm(q))) {
                if (used[f]) return false;
                used[f] = 1;
                groups[c].push_back(static_cast<int>(f));
                sum += q;
            }
        }
        if (fro_norm(p - sum) > tol.eps_rank * (1.0 + fro_norm(p))) return false;
    }
    if (!std::all_of(used.begin(), used.end(), [](char u) { return u != 0; })) return false;
    if (out_groups) *out_groups = std::move(groups);
    return true;
}

inline const std::uint64_t bell_numbers[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};

struct PosetNode {
    std::vector<std::vector<int>> blocks; // partition of finest-block indices
    ProjectionFamily family;
    DirectedGraph graph;
};

struct FamilyPoset {
    ProjectionFamily finest;
    std::vector<PosetNode> nodes;           // coarsest ({I}) first, finest last
    std::vector<std::pair<int, int>> hasse; // (coarser, finer) covering pairs
};

/// Every stabilizing family (all coarsenings of the finest one), its graph,
/// and the covering relation. Capped at max_blocks finest blocks.
inline FamilyPoset enumerate_poset(const RowContraction& t, const ToleranceConfig& tol = {},
                                   int max_blocks = 8) {
    FamilyPoset poset;
    poset.finest = finest_family(t, tol);
    require_valid_family(t, poset.finest, tol);
    const int k = static_cast<int>(poset.finest.projections.size());
    if (k > max_blocks)
        fail(errc::too_many_blocks, "finest family has " + std::to_string(k) +
                                        " blocks, cap is " + std::to_string(max_blocks));

    // restricted growth strings enumerate set partitions deterministically
    std::vector<int> rgs(static_cast<std::size_t>(k), 0);
    std::vector<std::vector<std::vector<int>>> partitions;
    while (true) {
        int nblocks = 0;
        for (int x : rgs) nblocks = std::max(nblocks, x + 1);
        std::vector<std::vector<int>> part(static_cast<std::size_t>(nblocks));
        for (int i = 0; i < k; ++i) part[static_cast<std::size_t>(rgs[static_cast<std::size_t>(i)])].push_back(i);
        partitions.push_back(std::move(part));

        int i = k - 1;
        for (; i > 0; --i) {
            int maxprefix = 0;
            for (int j = 0; j < i; ++j) maxprefix = std::max(maxprefix, rgs[static_cast<std::size_t>(j)]);
            if (rgs[static_cast<std::size_t>(i)] <= maxprefix) break;
        }
        if (i == 0) break;
        ++rgs[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) rgs[static_cast<std::size_t>(j)] = 0;
    }

    for (const auto& part : partitions) {
        PosetNode node;
        node.blocks = part;
        for (const auto& group : part) {
            Matrix q = Matrix::Zero(t.dim, t.dim);
            for (int f : group) q += poset.finest.projections[static_cast<std::size_t>(f)];
            node.family.projections.push_back(std::move(q));
        }
        node.graph = family_graph(t, node.family, tol);
        poset.nodes.push_back(std::move(node));
    }

    // covering pairs: merge exactly two blocks of the finer node
    auto key = [](const std::vector<std::vector<int>>& part) {
        std::vector<std::vector<int>> s = part;
        for (auto& b : s) std::sort(b.begin(), b.end());
        std::sort(s.begin(), s.end());
        return s;
    };
    std::vector<std::vector<std::vector<int>>> keys;
    keys.reserve(poset.nodes.size());
    for (const auto& n : poset.nodes) keys.push_back(key(n.blocks));
    for (std::size_t f = 0; f < poset.nodes.size(); ++f) {
        const auto& part = poset.nodes[f].blocks;
        if (part.size() < 2) continue;
        for (std::size_t a = 0; a < part.size(); ++a)
            for (std::size_t b = a + 1; b < part.size(); ++b) {
                std::vector<std::vector<int>> merged;
                std::vector<int> joined = part[a];
                joined.insert(joined.end(), part[b].begin(), part[b].end());
                std::sort(joined.begin(), joined.end());
                merged.push_back(joined);
                for (std::size_t c = 0; c < part.size(); ++c)
                    if (c != a && c != b) merged.push_back(part[c]);
                auto mk = key(merged);
                for (std::size_t cidx = 0; cidx < keys.size(); ++cidx)
                    if (keys[cidx] == mk) {
                        poset.hasse.push_back({static_cast<int>(cidx), static_cast<int>(f)});
                        break;
                    }
            }
    }
    std::sort(poset.hasse.begin(), poset.hasse.end());
    return poset;
}

} // namespace pidil
