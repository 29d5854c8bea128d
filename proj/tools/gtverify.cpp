// gtverify: verification toolchain CLI for gain-scheduled controller models.
#include <array>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "gtv/autocoder.hpp"
#include "gtv/ellipsoid.hpp"
#include "gtv/hull.hpp"
#include "gtv/json_io.hpp"
#include "gtv/lmi.hpp"
#include "gtv/model.hpp"
#include "gtv/numerics.hpp"
#include "gtv/proofcheck.hpp"
#include "gtv/simulator.hpp"
#include "json.hpp"

namespace {

using namespace gtv;
using nlohmann::json;

constexpr int kOk = 0, kVerifyFail = 2, kInputError = 3, kNumericError = 4;

struct Global {
    std::string tolerances_file;
    bool verbose = false;
    Tolerances tol;

    void load() {
        if (!tolerances_file.empty()) tol = Tolerances::from_json_file(tolerances_file);
    }
};

StateSpace statespace_from_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InputError(path + ": " + std::string(e.what()));
    }
    for (const char* k : {"A", "B", "C", "D"})
        if (!j.contains(k)) throw InputError(path + ": missing matrix \"" + k + "\"");
    return StateSpace(json_to_matrix(j["A"]), json_to_matrix(j["B"]),
                      json_to_matrix(j["C"]), json_to_matrix(j["D"]));
}

ScheduledModel schedule_from_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InputError(path + ": " + std::string(e.what()));
    }
    if (!j.contains("points")) throw InputError(path + ": missing \"points\"");
    ScheduledModel m;
    for (const auto& pt : j["points"]) {
        m.alphas.push_back(pt.at("alpha").get<double>());
        const Eigen::MatrixXd A = json_to_matrix(pt.at("A"));
        const Eigen::MatrixXd B = json_to_matrix(pt.at("B"));
        m.systems.emplace_back(A, B, Eigen::MatrixXd::Zero(1, A.rows()),
                               Eigen::MatrixXd::Zero(1, B.cols()));
    }
    if (j.contains("labels")) m.labels = j["labels"].get<std::vector<std::string>>();
    m.validate();
    return m;
}

Eigen::MatrixXd stacked_ab(const StateSpace& s) {
    Eigen::MatrixXd m(s.states(), s.states() + s.inputs());
    m << s.A, s.B;
    return m;
}

// ---------------------------------------------------------------------- hull
int run_hull(const Global& g, const std::string& model_path, const std::string& deltas_path,
             const std::string& report_path, const std::string& svg_dir, double alpha_min,
             double alpha_max, int grid, double growth) {
    const auto sched = schedule_from_file(model_path);
    json jd;
    try {
        jd = json::parse(read_file(deltas_path));
    } catch (const json::exception& e) {
        throw InputError(deltas_path + ": " + std::string(e.what()));
    }
    if (!jd.contains("deltas") || jd["deltas"].size() != 4)
        throw InputError(deltas_path + ": expected key \"deltas\" with four matrices");
    std::array<Eigen::MatrixXd, 4> deltas;
    for (int i = 0; i < 4; ++i) deltas[i] = json_to_matrix(jd["deltas"][i]);

    std::vector<Eigen::MatrixXd> samples;
    std::vector<double> alphas;
    for (int i = 0; i < grid; ++i) {
        const double a = alpha_min + (alpha_max - alpha_min) * i / (grid - 1.0);
        alphas.push_back(a);
        samples.push_back(stacked_ab(sched.at(a)));
    }
    const Eigen::MatrixXd lo = stacked_ab(sched.at(alpha_min));
    const Eigen::MatrixXd hi = stacked_ab(sched.at(alpha_max));

    json rep;
    int exit_code = kOk;
    try {
        const auto r = inflate_until_member(lo, hi, samples, deltas, growth, g.tol);
        const auto census = varying_entry_census(samples, g.tol);
        rep["member"] = true;
        rep["iterations"] = r.iterations;
        rep["census"] = {{"varying", census.varying},
                         {"constant_nonzero", census.constant_nonzero},
                         {"zero", census.zero},
                         {"total", census.total()}};
        json envs = json::array();
        const auto envelopes = entry_envelopes(r.polytope, samples, alphas, true, g.tol);
        for (const auto& e : envelopes) {
            json je;
            je["row"] = e.row;
            je["col"] = e.col;
            je["vertex_min"] = e.vertex_min;
            je["vertex_max"] = e.vertex_max;
            json curve = json::array();
            for (const auto& [a, v] : e.curve) curve.push_back(json::array({a, v}));
            je["curve"] = std::move(curve);
            envs.push_back(std::move(je));
        }
        rep["envelopes"] = std::move(envs);
        if (!svg_dir.empty()) {
            std::filesystem::create_directories(svg_dir);
            for (const auto& e : envelopes) {
                std::ostringstream os;
                os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" "
                      "height=\"320\">\n";
                double lo_v = e.vertex_min, hi_v = e.vertex_max;
                for (const auto& [a, v] : e.curve) {
                    lo_v = std::min(lo_v, v);
                    hi_v = std::max(hi_v, v);
                }
                if (hi_v - lo_v < 1e-15) hi_v = lo_v + 1.0;
                auto ypix = [&](double v) { return 300.0 - (v - lo_v) / (hi_v - lo_v) * 280.0; };
                auto xpix = [&](double a) {
                    return 10.0 + (a - alpha_min) / (alpha_max - alpha_min) * 460.0;
                };
                os << "<line x1=\"10\" x2=\"470\" y1=\"" << ypix(e.vertex_min)
                   << "\" y2=\"" << ypix(e.vertex_min) << "\" stroke=\"green\"/>\n";
                os << "<line x1=\"10\" x2=\"470\" y1=\"" << ypix(e.vertex_max)
                   << "\" y2=\"" << ypix(e.vertex_max) << "\" stroke=\"red\"/>\n";
                os << "<polyline fill=\"none\" stroke=\"blue\" points=\"";
                for (const auto& [a, v] : e.curve) os << xpix(a) << "," << ypix(v) << " ";
                os << "\"/>\n</svg>\n";
                write_file_atomic(svg_dir + "/entry_" + std::to_string(e.row) + "_" +
                                      std::to_string(e.col) + ".svg",
                                  os.str());
            }
        }
        std::cerr << "hull: member after " << r.iterations << " inflation(s), "
                  << census.varying << " varying of " << census.total() << " entries\n";
    } catch (const NumericError& e) {
        rep["member"] = false;
        rep["error"] = e.what();
        std::cerr << "hull: " << e.what() << "\n";
        exit_code = kVerifyFail;
    }
    if (!report_path.empty()) write_file_atomic(report_path, rep.dump(1) + "\n");
    return exit_code;
}

// ----------------------------------------------------------------- solve-lmi
int run_solve_lmi(const Global& g, const std::string& kind_str,
                  const std::string& vertices_path, double xi,
                  const std::string& gammas_path, const std::string& out_path) {
    const LmiKind kind = lmi_kind_from_string(kind_str);
    json jv;
    try {
        jv = json::parse(read_file(vertices_path));
    } catch (const json::exception& e) {
        throw InputError(vertices_path + ": " + std::string(e.what()));
    }
    json problem_json;
    problem_json["kind"] = kind_str;
    problem_json["vertices"] = jv.contains("vertices") ? jv["vertices"] : jv;
    if (kind == LmiKind::Invariance) {
        if (!(xi > 0)) throw InputError("solve-lmi: --xi is required for invariance");
        problem_json["xi"] = xi;
    }
    if (kind == LmiKind::BoundedReal) {
        if (gammas_path.empty())
            throw InputError("solve-lmi: --gammas is required for brl");
        json jg = json::parse(read_file(gammas_path));
        problem_json["gammas"] = jg.contains("gammas") ? jg["gammas"] : jg;
    }
    const LmiProblem problem = parse_lmi_problem(problem_json.dump());
    const auto r = solve(problem, g.tol);

    json out;
    out["status"] = r.status == SolveStatus::Feasible     ? "feasible"
                    : r.status == SolveStatus::Infeasible ? "infeasible"
                                                          : "undecided";
    out["iterations"] = r.iterations;
    out["best_margin"] = r.best_margin;
    if (!r.detail.empty()) out["detail"] = r.detail;
    if (r.certificate) {
        out.update(json::parse(serialize_certificate(*r.certificate)));
        std::cerr << "solve-lmi: feasible, final margin " << r.certificate->final_margin
                  << "\n";
    } else {
        std::cerr << "solve-lmi: " << out["status"].get<std::string>() << " (" << r.detail
                  << ")\n";
    }
    if (!out_path.empty()) write_file_atomic(out_path, out.dump(1) + "\n");
    return r.status == SolveStatus::Feasible ? kOk : kVerifyFail;
}

// ---------------------------------------------------------------- check-cert
int run_check_cert(const Global& g, const std::string& problem_path,
                   const std::string& p_path, const std::string& report_path) {
    const LmiProblem problem = parse_lmi_problem(read_file(problem_path));
    json jp;
    try {
        jp = json::parse(read_file(p_path));
    } catch (const json::exception& e) {
        throw InputError(p_path + ": " + std::string(e.what()));
    }
    const Eigen::MatrixXd pm = json_to_matrix(jp.contains("P") ? jp["P"] : jp);
    const SymMatrix P(pm, g.tol.sym_parse_abs * std::max(1.0, pm.cwiseAbs().maxCoeff()));
    const auto chk = check_certificate(problem, P, g.tol);
    json rep;
    rep["pass"] = chk.pass;
    rep["p_min_eigenvalue"] = chk.p_min_eigenvalue;
    rep["well_posed"] = chk.well_posed;
    rep["margins"] = json::array();
    for (const auto& m : chk.margins)
        rep["margins"].push_back(
            {{"vertex", m.vertex}, {"lam_max", m.lam_max}, {"pass", m.pass}});
    if (!report_path.empty()) write_file_atomic(report_path, rep.dump(1) + "\n");
    std::cerr << "check-cert: " << (chk.pass ? "pass" : "fail") << "\n";
    return chk.pass ? kOk : kVerifyFail;
}

// ------------------------------------------------------------------ autocode
int run_autocode(const Global&, const std::string& controller_path,
                 const std::string& cert_path, double bound, const std::string& out_path,
                 bool fixture_labels) {
    const StateSpace ctrl = statespace_from_file(controller_path);
    const LyapunovCertificate cert = parse_certificate(read_file(cert_path));
    AutocodeNames names;
    names.function_name = "pla_step";
    if (fixture_labels && ctrl.states() == 11) names.states = controller_state_labels();
    const auto prog = autocode(ctrl, cert, bound, names);
    write_file_atomic(out_path, emit_source(prog));
    std::cerr << "autocode: " << prog.statements.size() << " statements, "
              << prog.annotations.size() + 1 << " obligations emitted\n";
    return kOk;
}

// --------------------------------------------------------- check-annotations
int run_check_annotations(const Global& g, const std::string& source_path, double bound,
                          const std::string& report_path) {
    const auto prog = parse_source(read_file(source_path));
    const auto rep = check_program(prog, bound, g.tol);
    if (!report_path.empty()) write_file_atomic(report_path, serialize_report(rep) + "\n");
    std::cerr << "check-annotations: " << (rep.outcomes.size() - rep.failed_count())
              << "/" << rep.outcomes.size() << " obligations discharged\n";
    return rep.pass() ? kOk : kVerifyFail;
}

// ------------------------------------------------------------------ simulate
int run_simulate(const Global&, const std::string& config_path,
                 const std::string& trace_path, const std::string& svg_path,
                 const std::string& data_dir) {
    const auto cfg = parse_sim_config(read_file(config_path));
    const auto pts = load_fixture_set(data_dir + "/appendix_d");
    const auto trace = simulate(cfg, pts);
    write_file_atomic(trace_path, trace.to_csv());
    if (!svg_path.empty()) write_file_atomic(svg_path, trace_svg(trace));
    std::cerr << "simulate: " << trace.steps.size() << " steps written\n";
    if (cfg.monitor) {
        const auto rep =
            monitor_invariant(trace, cfg.monitor->ellipsoid, cfg.monitor->vars);
        if (rep.violated) {
            std::cerr << "simulate: monitor violated at step " << rep.first_violation_step
                      << " (worst margin " << rep.worst_margin << ")\n";
            return kVerifyFail;
        }
        std::cerr << "simulate: monitor quiet (worst margin " << rep.worst_margin << ")\n";
    }
    return kOk;
}

// ------------------------------------------------------------------ fixtures
json checksum_tree(const std::string& data_dir) {
    json files;
    std::vector<std::string> rels;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(data_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), data_dir).string();
        if (rel == "checksums.json") continue;
        rels.push_back(rel);
    }
    std::sort(rels.begin(), rels.end());
    for (const auto& rel : rels) files[rel] = fnv1a_hex(read_file(data_dir + "/" + rel));
    return files;
}

int run_fixtures(const Global& g, const std::string& data_dir, bool verify,
                 bool emit_checksums) {
    if (emit_checksums) {
        json j;
        j["algorithm"] = "fnv1a64";
        j["files"] = checksum_tree(data_dir);
        write_file_atomic(data_dir + "/checksums.json", j.dump(1) + "\n");
        std::cerr << "fixtures: wrote " << data_dir << "/checksums.json\n";
        return kOk;
    }
    if (!verify) throw InputError("fixtures: pass --verify or --emit-checksums");

    bool ok = true;
    const json manifest = json::parse(read_file(data_dir + "/checksums.json"));
    const json actual = checksum_tree(data_dir);
    for (const auto& [rel, hex] : manifest.at("files").items()) {
        if (!actual.contains(rel) || actual[rel] != hex) {
            std::cerr << "fixtures: checksum mismatch for " << rel << "\n";
            ok = false;
        }
    }
    for (const auto& [rel, hex] : actual.items())
        if (!manifest["files"].contains(rel)) {
            std::cerr << "fixtures: unexpected data file " << rel << "\n";
            ok = false;
        }

    const auto a = load_sym_matrix(data_dir + "/appendix_a.json", g.tol);
    const auto b = load_sym_matrix(data_dir + "/appendix_b.json", g.tol);
    const auto c = load_sym_matrix(data_dir + "/appendix_c.json", g.tol);
    if (a.n() != 11 || b.n() != 16 || c.n() != 16) {
        std::cerr << "fixtures: Lyapunov matrix dimensions are wrong\n";
        ok = false;
    }
    const auto pts = load_fixture_set(data_dir + "/appendix_d", g.tol);
    for (const auto& [name, p] : pts) {
        // the printed closed loop is the printed open loop with the measured
        // spool speeds fed back into the first two inputs
        Eigen::MatrixXd expect = p.open_loop.A;
        expect.col(0) -= p.open_loop.B.col(0);
        expect.col(2) -= p.open_loop.B.col(1);
        const double mismatch = (p.closed_loop_A - expect).cwiseAbs().maxCoeff();
        if (mismatch > 1.05) {
            std::cerr << "fixtures: " << name
                      << ": closed loop does not match open loop + feedback (max diff "
                      << mismatch << ")\n";
            ok = false;
        }
        if (p.gamma <= 0) {
            std::cerr << "fixtures: " << name << ": gamma must be positive\n";
            ok = false;
        }
    }
    schedule_from_file(data_dir + "/controller_schedule.json");
    std::cerr << "fixtures: " << (ok ? "all checks passed" : "FAILED") << "\n";
    return ok ? kOk : kVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gtverify: polytopic hulls, Lyapunov LMIs, ellipsoid invariants,\n"
                 "annotated step-function emission and checking, closed-loop simulation"};
    app.name("gtverify");
    app.require_subcommand(1);
    Global g;
    app.add_option("--tolerances", g.tolerances_file, "JSON file overriding tolerance defaults");
    app.add_flag("--verbose", g.verbose, "chatty diagnostics on stderr");

    auto* hull = app.add_subcommand("hull", "build the 4-corner hull and check membership");
    std::string hull_model, hull_deltas, hull_report, hull_svg;
    double alpha_min = 85.0, alpha_max = 106.0, growth = 2.0;
    int grid = 211;
    hull->add_option("--model", hull_model, "schedule JSON (alpha-indexed A, B)")->required();
    hull->add_option("--deltas", hull_deltas, "four perturbation matrices")->required();
    hull->add_option("--report", hull_report, "envelope report JSON");
    hull->add_option("--svg", hull_svg, "directory for per-entry envelope plots");
    hull->add_option("--alpha-min", alpha_min, "scheduling range low end");
    hull->add_option("--alpha-max", alpha_max, "scheduling range high end");
    hull->add_option("--grid", grid, "sample count across the range")->check(CLI::Range(2, 100000));
    hull->add_option("--growth", growth, "delta growth factor");

    auto* slv = app.add_subcommand("solve-lmi", "solve one of the three LMI families");
    std::string slv_kind, slv_vertices, slv_gammas, slv_out;
    double slv_xi = 0.0;
    slv->add_option("--kind", slv_kind, "invariance | brl | common")->required();
    slv->add_option("--vertices", slv_vertices, "vertex systems JSON")->required();
    slv->add_option("--xi", slv_xi, "invariance multiplier in (0, 1)");
    slv->add_option("--gammas", slv_gammas, "per-vertex gamma list JSON (brl)");
    slv->add_option("--out", slv_out, "certificate / report JSON");

    auto* chk = app.add_subcommand("check-cert", "re-verify a certificate independently");
    std::string chk_problem, chk_p, chk_report;
    chk->add_option("--problem", chk_problem, "LMI problem JSON")->required();
    chk->add_option("--P", chk_p, "candidate Lyapunov matrix JSON")->required();
    chk->add_option("--report", chk_report, "margin report JSON");

    auto* ac = app.add_subcommand("autocode", "emit the annotated step function");
    std::string ac_controller, ac_cert, ac_out;
    double ac_bound = 1.0;
    bool ac_fixture_labels = false;
    ac->add_option("--controller", ac_controller, "controller state space JSON")->required();
    ac->add_option("--cert", ac_cert, "invariance certificate JSON")->required();
    ac->add_option("--bound", ac_bound, "input norm bound");
    ac->add_option("--out", ac_out, "annotated source output")->required();
    ac->add_flag("--fixture-labels", ac_fixture_labels,
                 "use the delay-memory state names for 11-state controllers");

    auto* ca = app.add_subcommand("check-annotations", "discharge every annotation triple");
    std::string ca_source, ca_report;
    double ca_bound = 1.0;
    ca->add_option("--source", ca_source, "annotated source file")->required();
    ca->add_option("--bound", ca_bound, "input norm bound");
    ca->add_option("--report", ca_report, "verdict report JSON");

    auto* sim = app.add_subcommand("simulate", "closed-loop simulation with monitor");
    std::string sim_config, sim_trace, sim_svg, sim_data = "data";
    sim->add_option("--config", sim_config, "simulation config JSON")->required();
    sim->add_option("--trace", sim_trace, "CSV trace output")->required();
    sim->add_option("--svg", sim_svg, "plot output");
    sim->add_option("--data", sim_data, "fixture data directory");

    auto* fx = app.add_subcommand("fixtures", "verify or re-checksum the shipped data");
    std::string fx_data = "data";
    bool fx_verify = false, fx_emit = false;
    fx->add_option("--data", fx_data, "fixture data directory");
    fx->add_flag("--verify", fx_verify, "recompute checksums and invariants");
    fx->add_flag("--emit-checksums", fx_emit, "regenerate the checksum manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInputError;
    }

    try {
        g.load();
        if (g.verbose)
            std::cerr << "gtverify: eig_residual_rel=" << g.tol.eig_residual_rel
                      << " lmi_margin_rel=" << g.tol.lmi_margin_rel
                      << " lmi_max_iterations=" << g.tol.lmi_max_iterations
                      << " containment=" << g.tol.containment
                      << " hull_max_inflations=" << g.tol.hull_max_inflations << "\n";
        if (*hull)
            return run_hull(g, hull_model, hull_deltas, hull_report, hull_svg, alpha_min,
                            alpha_max, grid, growth);
        if (*slv) return run_solve_lmi(g, slv_kind, slv_vertices, slv_xi, slv_gammas, slv_out);
        if (*chk) return run_check_cert(g, chk_problem, chk_p, chk_report);
        if (*ac)
            return run_autocode(g, ac_controller, ac_cert, ac_bound, ac_out,
                                ac_fixture_labels);
        if (*ca) return run_check_annotations(g, ca_source, ca_bound, ca_report);
        if (*sim) return run_simulate(g, sim_config, sim_trace, sim_svg, sim_data);
        if (*fx) return run_fixtures(g, fx_data, fx_verify, fx_emit);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericError;
    }
    return kInputError;
}
