// Command-line front end: parse matrices, graphs, and families from JSON,
// run the analyses, and emit JSON (or DOT) with scripting-stable exit codes.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pidil/json_io.hpp"

namespace {

using namespace pidil;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::parse_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) fail(errc::parse_error, "cannot write " + path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << "\n";
}

int exit_code_for(errc c) {
    switch (c) {
    case errc::parse_error:
        return 1;
    case errc::depth_overflow:
    case errc::too_many_blocks:
        return 3;
    default:
        return 2;
    }
}

void diagnose(errc c, const std::string& message) {
    std::cerr << json{{"error", errc_name(c)}, {"message", message}}.dump() << "\n";
}

struct Options {
    std::string input;       // positional file (tuple or graph)
    std::string rc_path;     // -T
    std::string family_path; // -P
    std::string out_path;    // -o
    int depth = 4;
    bool dot = false;
    bool as_json = false;
    ToleranceConfig tol;
};

int run_validate_tuple(const Options& opt) {
    OperatorTuple t = parse_tuple(read_json_file(opt.input));
    DaggerReport rep = check_dagger(t, opt.tol);
    write_output(opt.out_path, to_json(rep).dump(2));
    if (!rep.verdict) {
        diagnose(errc::verification_failed, rep.failure);
        return 2;
    }
    return 0;
}

int run_extract_graph(const Options& opt) {
    OperatorTuple t = parse_tuple(read_json_file(opt.input));
    DirectedGraph g = extract_graph(t, opt.tol);
    write_output(opt.out_path, opt.dot ? to_dot(g) : to_json(g).dump(2));
    return 0;
}

int run_wold(const Options& opt) {
    OperatorTuple t = parse_tuple(read_json_file(opt.input));
    WoldDecomposition w = wold_decompose(t, opt.tol);
    write_output(opt.out_path, to_json(w).dump(2));
    return 0;
}

int run_validate_family(const Options& opt) {
    RowContraction t = parse_row_contraction(read_json_file(opt.rc_path));
    ProjectionFamily p = parse_family(read_json_file(opt.family_path));
    FamilyValidation v = validate_family(t, p, opt.tol);
    write_output(opt.out_path, to_json(v).dump(2));
    if (!v.valid) {
        diagnose(v.failure.value_or(errc::not_stabilizing), v.detail);
        return 2;
    }
    return 0;
}

int run_finest(const Options& opt) {
    RowContraction t = parse_row_contraction(read_json_file(opt.rc_path));
    ProjectionFamily p = finest_family(t, opt.tol);
    write_output(opt.out_path, to_json(p).dump(2));
    return 0;
}

int run_poset(const Options& opt) {
    RowContraction t = parse_row_contraction(read_json_file(opt.rc_path));
    FamilyPoset poset = enumerate_poset(t, opt.tol);
    write_output(opt.out_path, opt.dot ? poset_to_dot(poset) : to_json(poset).dump(2));
    return 0;
}

int run_dilate(const Options& opt) {
    RowContraction t = parse_row_contraction(read_json_file(opt.rc_path));
    ProjectionFamily p = parse_family(read_json_file(opt.family_path));
    DilationResult res = dilate(t, p, opt.depth, opt.tol);
    write_output(opt.out_path, to_json(res).dump(2));
    return 0;
}

int run_predict(const Options& opt) {
    RowContraction t = parse_row_contraction(read_json_file(opt.rc_path));
    ProjectionFamily p = parse_family(read_json_file(opt.family_path));
    Prediction pred = predict_properties(t, p, opt.tol);
    write_output(opt.out_path, to_json(pred).dump(2));
    return 0;
}

int run_type1(const Options& opt) {
    DirectedGraph g = parse_graph(read_json_file(opt.input));
    TypeOneVerdict v = is_type_one(g);
    write_output(opt.out_path, to_json(v).dump(2));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"partially isometric dilation toolkit"};
    app.require_subcommand(1);
    Options opt;

    auto add_tolerances = [&](CLI::App* cmd) {
        cmd->add_option("--eps-rank", opt.tol.eps_rank, "rank decision threshold");
        cmd->add_option("--eps-rel", opt.tol.eps_rel, "relative comparison threshold");
    };
    auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("-o,--output", opt.out_path, "output path (default: stdout)");
        cmd->add_flag("--json", opt.as_json, "emit JSON (default)");
    };

    CLI::App* validate_tuple = app.add_subcommand("validate-tuple", "check the tuple relations");
    validate_tuple->add_option("tuple", opt.input, "tuple JSON file")->required();
    add_tolerances(validate_tuple);
    add_output(validate_tuple);

    CLI::App* extract = app.add_subcommand("extract-graph", "graph of a relation-satisfying tuple");
    extract->add_option("tuple", opt.input, "tuple JSON file")->required();
    extract->add_flag("--dot", opt.dot, "emit DOT instead of JSON");
    add_tolerances(extract);
    add_output(extract);

    CLI::App* wold = app.add_subcommand("wold", "pure/coisometric decomposition of a tuple");
    wold->add_option("tuple", opt.input, "tuple JSON file")->required();
    add_tolerances(wold);
    add_output(wold);

    CLI::App* vfamily = app.add_subcommand("validate-family", "check a stabilizing family");
    vfamily->add_option("-T", opt.rc_path, "row contraction JSON file")->required();
    vfamily->add_option("-P", opt.family_path, "projection family JSON file")->required();
    add_tolerances(vfamily);
    add_output(vfamily);

    CLI::App* finest = app.add_subcommand("finest", "finest stabilizing family");
    finest->add_option("-T", opt.rc_path, "row contraction JSON file")->required();
    add_tolerances(finest);
    add_output(finest);

    CLI::App* poset = app.add_subcommand("poset", "all stabilizing families plus Hasse diagram");
    poset->add_option("-T", opt.rc_path, "row contraction JSON file")->required();
    poset->add_flag("--dot", opt.dot, "emit the Hasse diagram as DOT");
    add_tolerances(poset);
    add_output(poset);

    CLI::App* dilate_cmd = app.add_subcommand("dilate", "build the truncated minimal dilation");
    dilate_cmd->add_option("-T", opt.rc_path, "row contraction JSON file")->required();
    dilate_cmd->add_option("-P", opt.family_path, "projection family JSON file")->required();
    dilate_cmd->add_option("--depth", opt.depth, "truncation depth (default 4)");
    add_tolerances(dilate_cmd);
    add_output(dilate_cmd);

    CLI::App* predict = app.add_subcommand("predict", "purity/coisometry/multiplicity forecast");
    predict->add_option("-T", opt.rc_path, "row contraction JSON file")->required();
    predict->add_option("-P", opt.family_path, "projection family JSON file")->required();
    add_tolerances(predict);
    add_output(predict);

    CLI::App* type1 = app.add_subcommand("type1", "single vs double cycle classification");
    type1->add_option("graph", opt.input, "graph JSON file")->required();
    add_output(type1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        diagnose(errc::parse_error, e.what());
        return 1;
    }

    try {
        opt.tol.validate();
        if (validate_tuple->parsed()) return run_validate_tuple(opt);
        if (extract->parsed()) return run_extract_graph(opt);
        if (wold->parsed()) return run_wold(opt);
        if (vfamily->parsed()) return run_validate_family(opt);
        if (finest->parsed()) return run_finest(opt);
        if (poset->parsed()) return run_poset(opt);
        if (dilate_cmd->parsed()) return run_dilate(opt);
        if (predict->parsed()) return run_predict(opt);
        if (type1->parsed()) return run_type1(opt);
    } catch (const error& e) {
        diagnose(e.code(), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        diagnose(errc::verification_failed, e.what());
        return 2;
    }
    return 0;
}
