// JSON readers/writers for every value the library exchanges, plus DOT text
// for poset Hasse diagrams. Parsing failures always surface as ParseError.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pidil/dilation.hpp"
#include "pidil/families.hpp"
#include "pidil/graph.hpp"
#include "pidil/tuples.hpp"

namespace pidil {

using nlohmann::json;

// ---- matrices: {"rows": m, "cols": n, "entries": [[[re, im], ...], ...]} ----

inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(rows)}};
}

inline Matrix parse_matrix(const json& j) {
    try {
        const auto rows = j.at("rows").get<Index>();
        const auto cols = j.at("cols").get<Index>();
        if (rows < 0 || cols < 0) fail(errc::parse_error, "matrix dimensions must be nonnegative");
        const json& entries = j.at("entries");
        if (!entries.is_array() || static_cast<Index>(entries.size()) != rows)
            fail(errc::parse_error, "matrix entries must hold one array per row");
        Matrix m(rows, cols);
        for (Index i = 0; i < rows; ++i) {
            const json& row = entries[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<Index>(row.size()) != cols)
                fail(errc::parse_error, "matrix row has the wrong number of entries");
            for (Index jj = 0; jj < cols; ++jj) {
                const json& cell = row[static_cast<std::size_t>(jj)];
                if (!cell.is_array() || cell.size() != 2)
                    fail(errc::parse_error, "matrix entries must be [re, im] pairs");
                m(i, jj) = Complex(cell[0].get<double>(), cell[1].get<double>());
            }
        }
        return m;
    } catch (const error&) {
        throw;
    } catch (const std::exception& e) {
        fail(errc::parse_error, std::string("malformed matrix: ") + e.what());
    }
}

// ---- graphs: {"vertices": k, "edges": [[src, dst], ...]} ----

inline json to_json(const DirectedGraph& g) {
    json edges = json::array();
    for (const Edge& e : g.edges) edges.push_back(json::array({e.src, e.dst}));
    return json{{"vertices", g.vertex_count}, {"edges", std::move(edges)}};
}

inline DirectedGraph parse_graph(const json& j) {
    try {
        DirectedGraph g;
        g.vertex_count = j.at("vertices").get<int>();
        for (const json& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2)
                fail(errc::parse_error, "graph edges must be [src, dst] pairs");
            g.edges.push_back(Edge{e[0].get<int>(), e[1].get<int>()});
        }
        g.validate();
        return g;
    } catch (const error& e) {
        if (e.code() == errc::parse_error) throw;
        fail(errc::parse_error, std::string("malformed graph: ") + e.what());
    } catch (const std::exception& e) {
        fail(errc::parse_error, std::string("malformed graph: ") + e.what());
    }
}

// ---- operator tuples ----

inline json to_json(const OperatorTuple& t) {
    json ops = json::array();
    for (const Matrix& m : t.ops) ops.push_back(to_json(m));
    json mode;
    if (t.mode == TupleMode::exact) {
        mode = "exact";
    } else {
        mode = json{{"truncated", json{{"depth", t.depth}, {"levels", t.levels}}}};
    }
    return json{{"dim", t.dim}, {"mode", std::move(mode)}, {"ops", std::move(ops)}};
}

inline OperatorTuple parse_tuple(const json& j) {
    try {
        std::vector<Matrix> ops;
        for (const json& m : j.at("ops")) ops.push_back(parse_matrix(m));
        const json& mode = j.at("mode");
        OperatorTuple t;
        if (mode.is_string() && mode.get<std::string>() == "exact") {
            t = make_exact_tuple(std::move(ops));
        } else if (mode.is_object() && mode.contains("truncated")) {
            const json& tr = mode.at("truncated");
            t = make_truncated_tuple(std::move(ops), tr.at("depth").get<int>(),
                                     tr.at("levels").get<std::vector<int>>());
        } else {
            fail(errc::parse_error, "tuple mode must be \"exact\" or {\"truncated\": ...}");
        }
        if (t.dim != j.at("dim").get<int>())
            fail(errc::parse_error, "tuple dim does not match its operators");
        return t;
    } catch (const error& e) {
        if (e.code() == errc::parse_error) throw;
        fail(errc::parse_error, std::string("malformed tuple: ") + e.what());
    } catch (const std::exception& e) {
        fail(errc::parse_error, std::string("malformed tuple: ") + e.what());
    }
}

// ---- row contractions: {"dim": k, "ops": [...]} ----

inline json to_json(const RowContraction& t) {
    json ops = json::array();
    for (const Matrix& m : t.ops) ops.push_back(to_json(m));
    return json{{"dim", t.dim}, {"ops", std::move(ops)}};
}

inline RowContraction parse_row_contraction(const json& j) {
    try {
        std::vector<Matrix> ops;
        for (const json& m : j.at("ops")) ops.push_back(parse_matrix(m));
        RowContraction t = make_row_contraction(std::move(ops));
        if (t.dim != j.at("dim").get<int>())
            fail(errc::parse_error, "row contraction dim does not match its operators");
        return t;
    } catch (const error& e) {
        if (e.code() == errc::parse_error) throw;
        fail(errc::parse_error, std::string("malformed row contraction: ") + e.what());
    } catch (const std::exception& e) {
        fail(errc::parse_error, std::string("malformed row contraction: ") + e.what());
    }
}

// ---- projection families: {"projections": [...]} ----

inline json to_json(const ProjectionFamily& p) {
    json blocks = json::array();
    for (const Matrix& m : p.projections) blocks.push_back(to_json(m));
    return json{{"projections", std::move(blocks)}};
}

inline ProjectionFamily parse_family(const json& j) {
    try {
        ProjectionFamily p;
        for (const json& m : j.at("projections")) p.projections.push_back(parse_matrix(m));
        if (p.projections.empty()) fail(errc::parse_error, "family needs at least one projection");
        for (const Matrix& m : p.projections) {
            require_square(m, "family projection");
            require_same_shape(m, p.projections.front(), "family projection");
        }
        return p;
    } catch (const error& e) {
        if (e.code() == errc::parse_error) throw;
        fail(errc::parse_error, std::string("malformed family: ") + e.what());
    } catch (const std::exception& e) {
        fail(errc::parse_error, std::string("malformed family: ") + e.what());
    }
}

// ---- analysis reports (output documents) ----

inline json to_json(const DaggerReport& r) {
    json projections = json::array();
    for (const Matrix& q : r.initial_projections) projections.push_back(to_json(q));
    json labels = json::array();
    for (const auto& [s, t] : r.edge_labels) labels.push_back(json::array({s, t}));
    return json{{"verdict", r.verdict},
                {"idempotent_residual", r.idempotent_residual},
                {"row_contraction_residual", r.row_contraction_residual},
                {"equal_or_orthogonal_residual", r.equal_or_orthogonal_residual},
                {"range_support_residual", r.range_support_residual},
                {"partition_residual", r.partition_residual},
                {"min_op_norm", r.min_op_norm},
                {"initial_projections", std::move(projections)},
                {"edge_labels", std::move(labels)},
                {"ambiguous_ops", r.ambiguous_ops},
                {"failure", r.failure}};
}

inline json to_json(const WoldDecomposition& w) {
    json projections = json::array();
    for (const Matrix& q : w.initial_projections) projections.push_back(to_json(q));
    return json{{"graph", to_json(w.graph)},
                {"initial_projections", std::move(projections)},
                {"wandering", to_json(w.wandering)},
                {"pure_basis", to_json(w.pure_basis)},
                {"coisometric_basis", to_json(w.coisometric_basis)},
                {"alpha", w.alpha}};
}

inline json to_json(const FamilyValidation& v) {
    json labels = json::array();
    for (const auto& [s, t] : v.edge_labels) labels.push_back(json::array({s, t}));
    return json{{"valid", v.valid},
                {"failure", v.failure ? json(errc_name(*v.failure)) : json(nullptr)},
                {"detail", v.detail},
                {"edge_labels", std::move(labels)},
                {"partition_residual", v.partition_residual},
                {"stabilizing_residual", v.stabilizing_residual}};
}

inline json to_json(const Prediction& p) {
    return json{{"r_norm", p.r_norm},
                {"pure_by_bound", p.pure_by_bound},
                {"tail", p.tail},
                {"pure_by_tail", p.pure_by_tail},
                {"pure", p.pure},
                {"fully_coisometric", p.fully_coisometric},
                {"predicted_alpha", p.alpha}};
}

inline json to_json(const TypeOneVerdict& v) {
    return json{{"type_one", v.type_one},
                {"witness", v.witness ? json(*v.witness) : json(nullptr)},
                {"reason", v.reason}};
}

inline json to_json(const FamilyPoset& poset) {
    json nodes = json::array();
    for (std::size_t i = 0; i < poset.nodes.size(); ++i) {
        const PosetNode& node = poset.nodes[i];
        json blocks = json::array();
        for (const std::vector<int>& b : node.blocks) blocks.push_back(b);
        nodes.push_back(json{{"index", i}, {"blocks", std::move(blocks)}, {"graph", to_json(node.graph)}});
    }
    json hasse = json::array();
    for (const auto& [coarse, fine] : poset.hasse) hasse.push_back(json::array({coarse, fine}));
    return json{{"nodes", std::move(nodes)}, {"hasse", std::move(hasse)}};
}

inline std::string poset_to_dot(const FamilyPoset& poset, const std::string& name = "poset") {
    std::string out = "digraph " + name + " {\n";
    for (std::size_t i = 0; i < poset.nodes.size(); ++i) {
        std::string label;
        for (const std::vector<int>& block : poset.nodes[i].blocks) {
            label += "{";
            for (std::size_t k = 0; k < block.size(); ++k) {
                if (k) label += ",";
                label += std::to_string(block[k]);
            }
            label += "}";
        }
        out += "  n" + std::to_string(i) + " [label=\"" + label + "\"];\n";
    }
    for (const auto& [coarse, fine] : poset.hasse)
        out += "  n" + std::to_string(coarse) + " -> n" + std::to_string(fine) + ";\n";
    out += "}\n";
    return out;
}

// Dilation output: the tuple fields stay at the top level so the document is
// itself a valid tuple file, with the construction data alongside.
inline json to_json(const DilationResult& r) {
    json doc = to_json(r.tuple);
    doc["embedding"] = json::array({r.embed_lo, r.embed_hi});
    doc["depth"] = r.depth;
    doc["graph"] = to_json(r.graph);
    doc["family"] = to_json(r.family);
    json index = json::array();
    for (const BasisSlot& slot : r.basis_index)
        index.push_back(json{{"path", slot.path.edges},
                             {"src", slot.path.src},
                             {"dst", slot.path.dst},
                             {"j", slot.j},
                             {"coord", slot.coord}});
    doc["basis_index"] = std::move(index);
    const DilationReport& rep = r.report;
    doc["report"] = json{{"verdict", rep.verdict},
                         {"compression_residual", rep.compression_residual},
                         {"adjoint_invariance_residual", rep.adjoint_invariance_residual},
                         {"initial_projection_residual", rep.initial_projection_residual},
                         {"minimality_defect", rep.minimality_defect},
                         {"proof_identity_residual", rep.proof_identity_residual},
                         {"defect_dims", rep.defect_dims},
                         {"relations",
                          json{{"verdict", rep.dagger.verdict},
                               {"idempotent_residual", rep.dagger.idempotent_residual},
                               {"row_contraction_residual", rep.dagger.row_contraction_residual},
                               {"equal_or_orthogonal_residual",
                                rep.dagger.equal_or_orthogonal_residual},
                               {"range_support_residual", rep.dagger.range_support_residual},
                               {"partition_residual", rep.dagger.partition_residual},
                               {"failure", rep.dagger.failure}}}};
    return doc;
}

inline json parse_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(errc::parse_error, "input is not valid JSON");
    return j;
}

} // namespace pidil
