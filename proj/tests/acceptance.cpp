// Acceptance gate: ten end-to-end checks, one PASS/FAIL line each.
// Exit code is the number of failed checks.
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "pidil/dilation.hpp"
#include "pidil/json_io.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace pidil;

namespace {

int failures = 0;

void report(bool ok, const std::string& what) {
    std::printf("%s: %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

Matrix coord_proj(Index dim, std::initializer_list<Index> coords) {
    Matrix p = Matrix::Zero(dim, dim);
    for (Index c : coords) p(c, c) = 1.0;
    return p;
}

RowContraction worked_example() {
    double inv = 1.0 / std::sqrt(2.0);
    Matrix v1 = Matrix::Zero(2, 2), v2 = Matrix::Zero(2, 2), v3 = Matrix::Zero(2, 2);
    v1(0, 0) = 1.0;
    v2(1, 1) = inv;
    v3(1, 0) = inv;
    return make_row_contraction({v1, v2, v3});
}

// ---------------------------------------------------------------- sweep ----

// One generated case plus everything the sweep criteria need from it.
struct SweepCase {
    RowContraction t;
    ProjectionFamily p;
    DefectData dd;
    DilationResult res;
};

ProjectionFamily coarsen(const ProjectionFamily& fine, gen::Rng& rng) {
    const std::size_t b = fine.projections.size();
    std::vector<int> group(b), order;
    for (std::size_t i = 0; i < b; ++i) group[i] = static_cast<int>(rng() % b);
    ProjectionFamily coarse;
    for (std::size_t i = 0; i < b; ++i) {
        int g = group[i];
        std::size_t slot = 0;
        for (; slot < order.size(); ++slot)
            if (order[slot] == g) break;
        if (slot == order.size()) {
            order.push_back(g);
            coarse.projections.push_back(fine.projections[i]);
        } else {
            coarse.projections[slot] += fine.projections[i];
        }
    }
    return coarse;
}

SweepCase make_sweep_case(gen::Rng& rng, int index, const ToleranceConfig& tol) {
    for (;;) {
        int blocks = 1 + static_cast<int>(rng() % 3);
        int dim = blocks + static_cast<int>(rng() % 3);
        gen::BlockCase c = gen::block_case(rng, dim, blocks, static_cast<int>(rng() % 2),
                                           index % 3 == 2);
        SweepCase sc;
        sc.t = c.t;
        sc.p = index % 3 == 1 ? coarsen(c.p, rng) : c.p;

        // keep the depth-3 slot count small enough for a fast suite
        std::vector<std::pair<int, int>> labels;
        DirectedGraph g = family_graph(sc.t, sc.p, tol, &labels);
        std::size_t bound = static_cast<std::size_t>(dim);
        for (const Path& w : paths_up_to(g, 3)) {
            double sz = sc.p.projections[static_cast<std::size_t>(w.src)].real().trace();
            bound += static_cast<std::size_t>(sz + 0.5);
        }
        if (bound > 150) continue;

        sc.dd = defect(sc.t, sc.p, tol);
        sc.res = detail::assemble_dilation(sc.t, sc.p, 3, sc.dd, tol);
        return sc;
    }
}

void run_sweep_criteria(gen::Rng& rng, const ToleranceConfig& tol) {
    const int cases = 200;
    double max_proof = 0.0, max_lemma = 0.0;
    double max_intertwine = 0.0, max_embed = 0.0;
    int contract_bad = 0, rank_bad = 0, rotated_distinct = 0;
    std::string first_bad;

    for (int i = 0; i < cases; ++i) {
        SweepCase sc = make_sweep_case(rng, i, tol);
        max_proof = std::max(max_proof, sc.dd.proof_identity_residual);

        // pairwise defect-range overlap whenever the range vertices differ
        std::vector<Matrix> bases;
        for (const Matrix& de : sc.dd.d_e) bases.push_back(range_basis(de, tol));
        for (std::size_t a = 0; a < bases.size(); ++a)
            for (std::size_t b = a + 1; b < bases.size(); ++b) {
                if (sc.dd.labels[a].second == sc.dd.labels[b].second) continue;
                if (bases[a].cols() == 0 || bases[b].cols() == 0) continue;
                max_lemma = std::max(max_lemma, fro_norm(bases[a].adjoint() * bases[b]));
            }

        const DilationReport& rep = sc.res.report;
        bool contract = rep.dagger.verdict && rep.compression_residual <= 1e-8 &&
                        rep.adjoint_invariance_residual <= 1e-8 &&
                        rep.initial_projection_residual <= 1e-8 &&
                        rep.minimality_defect <= 1e-8 && rep.verdict;
        if (!contract) {
            ++contract_bad;
            if (first_bad.empty())
                first_bad = "case " + std::to_string(i) + ": " +
                            (rep.dagger.verdict ? "residuals" : rep.dagger.failure);
        }

        // wandering ranks of the dilation vs compressed ranks of the input
        const OperatorTuple& s = sc.res.tuple;
        const std::vector<int> keep = s.retained_indices();
        Matrix defect_s = Matrix::Identity(s.dim, s.dim);
        for (const Matrix& m : s.ops) defect_s -= m * m.adjoint();
        Matrix dc = compress(defect_s, keep);
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(dc));
        std::vector<Index> kept;
        double lead = es.eigenvalues().cwiseAbs().maxCoeff();
        for (Index j = 0; j < es.eigenvalues().size(); ++j)
            if (std::abs(es.eigenvalues()(j)) > 1e-14 * std::max(lead, 1.0)) kept.push_back(j);
        Matrix factor(dc.rows(), static_cast<Index>(kept.size()));
        for (std::size_t j = 0; j < kept.size(); ++j)
            factor.col(static_cast<Index>(j)) =
                es.eigenvectors().col(kept[j]) * es.eigenvalues()(kept[j]);
        Matrix defect_t = Matrix::Identity(sc.t.dim, sc.t.dim);
        for (const Matrix& m : sc.t.ops) defect_t -= m * m.adjoint();
        for (std::size_t k = 0; k < sc.p.projections.size(); ++k) {
            int op = -1;
            for (std::size_t e = 0; e < sc.dd.labels.size(); ++e)
                if (sc.dd.labels[e].first == static_cast<int>(k)) op = static_cast<int>(e);
            const Matrix& se = s.ops[static_cast<std::size_t>(op)];
            Matrix qc = compress(se.adjoint() * se, keep);
            int rank_s = rank_tol(qc * factor, tol);
            int rank_t = rank_tol(sc.p.projections[k] * defect_t, tol);
            if (rank_s != rank_t) ++rank_bad;
        }

        // independently assembled dilation over rotated defect-block bases
        DefectData rotated = gen::rotate_blocks(sc.dd, rng);
        DilationResult other = detail::assemble_dilation(sc.t, sc.p, 3, rotated, tol);
        for (std::size_t e = 0; e < s.ops.size(); ++e)
            if (fro_norm(s.ops[e] - other.tuple.ops[e]) > 1e-6) {
                ++rotated_distinct;
                break;
            }
        UniquenessReport uq = verify_uniqueness(sc.t, sc.p, 3, sc.res, other, tol);
        max_intertwine = std::max(max_intertwine, uq.intertwining_residual);
        max_embed = std::max(max_embed, uq.embedding_residual);
    }

    report(max_proof <= 1e-8, "defect proof identity <= 1e-8 over " + std::to_string(cases) +
                                  " randomized (T, P) pairs (max " + fmt(max_proof) + ")");
    report(max_lemma <= 1e-8, "defect ranges for distinct range vertices are orthogonal"
                              " (max overlap " + fmt(max_lemma) + ")");
    report(contract_bad == 0, "depth-3 dilations satisfy the full contract" +
                                  (contract_bad ? " (" + std::to_string(contract_bad) +
                                                      " failed, first: " + first_bad + ")"
                                                : std::string(" in all cases")));
    report(rank_bad == 0, "wandering rank of every dilation vertex matches the compressed"
                          " input rank" + (rank_bad ? " (" + std::to_string(rank_bad) +
                                                          " mismatches)"
                                                    : std::string("")));
    report(max_intertwine <= 1e-8 && max_embed <= 1e-10 && rotated_distinct > 0,
           "rotated-basis dilations (" + std::to_string(rotated_distinct) +
               " distinct) are unitarily equivalent (intertwining " + fmt(max_intertwine) +
               ", embedding " + fmt(max_embed) + ")");
}

// ------------------------------------------------------- fixed examples ----

void run_worked_example(const ToleranceConfig& tol) {
    RowContraction v = worked_example();
    ProjectionFamily fin = finest_family(v, tol);
    bool blocks_ok = fin.projections.size() == 2 &&
                     fro_norm(fin.projections[0] - coord_proj(2, {0})) <= 1e-12 &&
                     fro_norm(fin.projections[1] - coord_proj(2, {1})) <= 1e-12;

    DirectedGraph g = family_graph(v, fin, tol);
    DirectedGraph expected;
    expected.vertex_count = 2;
    expected.edges = {{0, 0}, {1, 1}, {0, 1}};
    bool graph_ok = g == expected;

    Matrix row = Matrix::Zero(2, 2);
    for (const Matrix& m : v.ops) row += m * m.adjoint();
    double coiso = fro_norm(row - Matrix::Identity(2, 2));

    Prediction pred = predict_properties(v, fin, tol);
    bool pred_ok = pred.fully_coisometric && pred.alpha == std::vector<int>{0, 0};

    TypeOneVerdict tv = is_type_one(g);

    report(blocks_ok && graph_ok && coiso <= 1e-12 && pred_ok && tv.type_one,
           "two-block worked example: finest family, graph, coisometry (" + fmt(coiso) +
               "), multiplicities (0,0), single-cycle classification");
}

void run_scalar_reduction(const ToleranceConfig& tol) {
    RowContraction half = make_row_contraction({Matrix::Constant(1, 1, 0.5)});
    ProjectionFamily whole{{Matrix::Identity(1, 1)}};
    double worst_isometry = 0.0;
    for (int d = 1; d <= 4; ++d) {
        DilationResult res = dilate(half, whole, d, tol);
        const std::vector<int> keep = res.tuple.retained_indices();
        for (const Matrix& m : res.tuple.ops) {
            Matrix q = compress(m.adjoint() * m, keep);
            worst_isometry =
                std::max(worst_isometry, fro_norm(q - Matrix::Identity(q.rows(), q.cols())));
        }
    }

    DirectedGraph loop;
    loop.vertex_count = 1;
    loop.edges = {{0, 0}};
    std::vector<double> tails = tail_sums(half.ops, loop, {1, 2, 3, 4});
    double worst_tail = 0.0;
    for (int d = 1; d <= 4; ++d)
        worst_tail = std::max(worst_tail,
                              std::abs(tails[static_cast<std::size_t>(d - 1)] - std::pow(0.25, d)));

    report(worst_isometry <= 1e-10 && worst_tail <= 1e-12,
           "scalar one-half reduction: isometric truncations at depths 1..4 (" +
               fmt(worst_isometry) + "), geometric purity margins (" + fmt(worst_tail) + ")");
}

// ----------------------------------------------------------- poset laws ----

using Part = std::vector<int>; // finest block index -> group id

Part normalize(Part p) {
    std::vector<int> map(p.size(), -1);
    int next = 0;
    for (int& x : p) {
        if (map[static_cast<std::size_t>(x)] < 0) map[static_cast<std::size_t>(x)] = next++;
        x = map[static_cast<std::size_t>(x)];
    }
    return p;
}

Part node_part(const PosetNode& n, int k) {
    Part p(static_cast<std::size_t>(k), -1);
    for (std::size_t g = 0; g < n.blocks.size(); ++g)
        for (int f : n.blocks[g]) p[static_cast<std::size_t>(f)] = static_cast<int>(g);
    return p;
}

// a is a coarsening of (or equal to) b
bool coarser_eq(const Part& a, const Part& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (b[i] == b[j] && a[i] != a[j]) return false;
    return true;
}

Part family_part(const ProjectionFamily& coarse, const ProjectionFamily& finest,
                 const ToleranceConfig& tol) {
    Part p(finest.projections.size(), -1);
    for (std::size_t f = 0; f < finest.projections.size(); ++f)
        for (std::size_t c = 0; c < coarse.projections.size(); ++c) {
            const Matrix& q = finest.projections[f];
            if (fro_norm(coarse.projections[c] * q - q) <= tol.eps_rank * (1.0 + fro_norm(q))) {
                p[f] = static_cast<int>(c);
                break;
            }
        }
    return p;
}

bool check_poset_laws(const RowContraction& t, const ToleranceConfig& tol, std::string& why) {
    FamilyPoset poset = enumerate_poset(t, tol);
    const int k = static_cast<int>(poset.finest.projections.size());
    if (poset.nodes.size() != bell_numbers[k]) {
        why = "cardinality " + std::to_string(poset.nodes.size()) + " != Bell(" +
              std::to_string(k) + ")";
        return false;
    }

    std::vector<Part> parts;
    for (const PosetNode& n : poset.nodes) parts.push_back(normalize(node_part(n, k)));

    // {I} is the minimum, the finest family the maximum
    if (poset.nodes.front().family.projections.size() != 1 ||
        fro_norm(poset.nodes.front().family.projections[0] - Matrix::Identity(t.dim, t.dim)) >
            1e-12) {
        why = "first node is not {I}";
        return false;
    }
    for (const Part& p : parts) {
        if (!coarser_eq(parts.front(), p)) { why = "{I} is not minimal"; return false; }
        if (!coarser_eq(p, parts.back())) { why = "finest is not maximal"; return false; }
    }
    if (!leq(poset.nodes.front().family, poset.nodes.back().family, tol)) {
        why = "leq({I}, finest) failed";
        return false;
    }

    // join is the least upper bound of every pair
    for (std::size_t a = 0; a < poset.nodes.size(); ++a)
        for (std::size_t b = a; b < poset.nodes.size(); ++b) {
            ProjectionFamily j = join(poset.nodes[a].family, poset.nodes[b].family, tol);
            Part pj = normalize(family_part(j, poset.finest, tol));
            for (int x : pj)
                if (x < 0) { why = "join block misses a finest block"; return false; }
            if (!coarser_eq(parts[a], pj) || !coarser_eq(parts[b], pj)) {
                why = "join is not an upper bound";
                return false;
            }
            for (std::size_t c = 0; c < poset.nodes.size(); ++c)
                if (coarser_eq(parts[a], parts[c]) && coarser_eq(parts[b], parts[c]) &&
                    !coarser_eq(pj, parts[c])) {
                    why = "join is not least";
                    return false;
                }
        }

    // comparability carries the graphs onto each other by merging blocks
    for (std::size_t c = 0; c < poset.nodes.size(); ++c)
        for (std::size_t f = 0; f < poset.nodes.size(); ++f) {
            if (!coarser_eq(parts[c], parts[f])) continue;
            if (!leq(poset.nodes[c].family, poset.nodes[f].family, tol)) {
                why = "partition refinement disagrees with leq";
                return false;
            }
            std::vector<std::vector<int>> groups(poset.nodes[c].blocks.size());
            for (std::size_t fg = 0; fg < poset.nodes[f].blocks.size(); ++fg) {
                int finest_member = poset.nodes[f].blocks[fg].front();
                groups[static_cast<std::size_t>(parts[c][static_cast<std::size_t>(
                    finest_member)])].push_back(static_cast<int>(fg));
            }
            if (!(deform(poset.nodes[f].graph, groups) == poset.nodes[c].graph)) {
                why = "graph deformation mismatch";
                return false;
            }
        }
    return true;
}

void run_poset_criterion(gen::Rng& rng, const ToleranceConfig& tol) {
    struct Input { RowContraction t; const char* name; };
    std::vector<Input> inputs;
    inputs.push_back({worked_example(), "two blocks"});
    inputs.push_back({gen::block_case(rng, 4, 3, 2, false).t, "three blocks"});
    inputs.push_back({gen::block_case(rng, 6, 5, 1, false).t, "five blocks"});
    inputs.push_back({gen::block_case(rng, 6, 6, 1, true).t, "six blocks"});

    bool ok = true;
    std::string detail;
    for (const Input& in : inputs) {
        std::string why;
        if (!check_poset_laws(in.t, tol, why)) {
            ok = false;
            detail = std::string(in.name) + ": " + why;
            break;
        }
    }
    report(ok, "poset laws (join as least upper bound, extrema, Bell cardinality, graph"
               " deformation) up to six finest blocks" +
                   (ok ? std::string("") : " (" + detail + ")"));
}

// ------------------------------------------------------------ wold oracle ----

void run_wold_criterion(gen::Rng& rng, const ToleranceConfig& tol) {
    bool shifts_ok = true;
    int shift_cases = 0;
    while (shift_cases < 40) {
        DirectedGraph g = gen::random_graph(rng, 4, 6);
        if (!g.has_no_sinks() || g.edges.empty()) continue;
        std::vector<int> dims;
        for (int v = 0; v < g.vertex_count; ++v) dims.push_back(1 + static_cast<int>(rng() % 3));
        OperatorTuple s = canonical_shift(g, dims, 2);
        WoldDecomposition w = wold_decompose(s, tol);
        std::vector<int> expected;
        std::vector<char> seen(static_cast<std::size_t>(g.vertex_count), 0);
        for (const Edge& e : g.edges)
            if (!seen[static_cast<std::size_t>(e.src)]) {
                seen[static_cast<std::size_t>(e.src)] = 1;
                expected.push_back(dims[static_cast<std::size_t>(e.src)]);
            }
        if (w.alpha != expected || w.coisometric_basis.cols() != 0) shifts_ok = false;
        ++shift_cases;
    }

    bool cycles_ok = true;
    for (int i = 0; i < 100; ++i) {
        gen::CycleCase c = gen::cycle_case(rng);
        WoldDecomposition w = wold_decompose(c.s, tol);
        if (w.pure_basis.cols() != 0) cycles_ok = false;
        if (!is_fully_coisometric(c.s, tol)) cycles_ok = false;
    }

    report(shifts_ok && cycles_ok,
           "wold oracle: canonical shifts are pure with block-dimension multiplicities;"
           " 100 permutation-built tuples are fully coisometric");
}

// -------------------------------------------------------- type-one brute ----

void run_type_one_criterion(gen::Rng& rng) {
    int checked = 0, bad = 0;
    while (checked < 500) {
        DirectedGraph g = gen::random_graph(rng, 5, 8);
        TypeOneVerdict v = is_type_one(g);
        bool brute = oracle::brute_double_cycle(g);
        if (v.type_one == brute) ++bad;
        if (!v.type_one) {
            if (!v.witness || oracle::simple_cycles_at(g, *v.witness) < 2) ++bad;
        }
        ++checked;
    }
    report(bad == 0, "double-cycle classifier agrees with exhaustive enumeration on 500"
                     " random graphs" + (bad ? " (" + std::to_string(bad) + " disagreements)"
                                             : std::string("")));
}

} // namespace

int main() {
    ToleranceConfig tol;
    gen::Rng rng(20260814);

    run_sweep_criteria(rng, tol);
    run_worked_example(tol);
    run_scalar_reduction(tol);
    run_poset_criterion(rng, tol);
    run_wold_criterion(rng, tol);
    run_type_one_criterion(rng);

    std::printf("%d of 10 checks failed\n", failures);
    return failures;
}
