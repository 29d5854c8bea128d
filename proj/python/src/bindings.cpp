#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gtv/autocoder.hpp"
#include "gtv/ellipsoid.hpp"
#include "gtv/hull.hpp"
#include "gtv/lmi.hpp"
#include "gtv/model.hpp"
#include "gtv/numerics.hpp"
#include "gtv/proofcheck.hpp"
#include "gtv/simulator.hpp"

namespace py = pybind11;
using namespace gtv;

namespace {

SymMatrix sym(const Eigen::MatrixXd& m) {
    return SymMatrix(m, 1e-9 * (1.0 + m.cwiseAbs().maxCoeff()));
}

StateSpace statespace(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& C, const Eigen::MatrixXd& D) {
    return StateSpace(A, B, C, D);
}

LmiProblem make_problem(const std::string& kind, const std::vector<py::dict>& vertices,
                        double xi, const std::vector<double>& gammas) {
    const LmiKind k = lmi_kind_from_string(kind);
    auto mat = [](const py::dict& d, const char* key) {
        return d[key].cast<Eigen::MatrixXd>();
    };
    switch (k) {
        case LmiKind::CommonLyapunov: {
            std::vector<Eigen::MatrixXd> as;
            for (const auto& v : vertices) as.push_back(mat(v, "A"));
            return build_common_lyapunov_lmi(as);
        }
        case LmiKind::Invariance: {
            std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> ab;
            for (const auto& v : vertices) ab.emplace_back(mat(v, "A"), mat(v, "B"));
            return build_invariance_lmi(ab, xi);
        }
        case LmiKind::BoundedReal: {
            std::vector<LmiVertex> vs;
            for (const auto& v : vertices)
                vs.push_back({mat(v, "A"), mat(v, "B"), mat(v, "C"), mat(v, "D")});
            return build_bounded_real_lmi(vs, gammas);
        }
    }
    throw InputError("unknown LMI kind");
}

py::dict solve_py(const std::string& kind, const std::vector<py::dict>& vertices,
                  double xi, const std::vector<double>& gammas) {
    const auto r = solve(make_problem(kind, vertices, xi, gammas));
    py::dict out;
    out["status"] = r.status == SolveStatus::Feasible     ? "feasible"
                    : r.status == SolveStatus::Infeasible ? "infeasible"
                                                          : "undecided";
    out["iterations"] = r.iterations;
    out["best_margin"] = r.best_margin;
    out["detail"] = r.detail;
    if (r.certificate) {
        out["P"] = r.certificate->P.mat();
        out["margins"] = r.certificate->margins;
        out["final_margin"] = r.certificate->final_margin;
        out["xi"] = r.certificate->xi;
    }
    return out;
}

py::dict check_certificate_py(const std::string& kind,
                              const std::vector<py::dict>& vertices,
                              const Eigen::MatrixXd& P, double xi,
                              const std::vector<double>& gammas) {
    const auto chk = check_certificate(make_problem(kind, vertices, xi, gammas), sym(P));
    py::dict out;
    out["pass"] = chk.pass;
    out["p_min_eigenvalue"] = chk.p_min_eigenvalue;
    py::list margins;
    for (const auto& m : chk.margins) {
        py::dict jm;
        jm["vertex"] = m.vertex;
        jm["lam_max"] = m.lam_max;
        jm["pass"] = m.pass;
        margins.append(jm);
    }
    out["margins"] = margins;
    return out;
}

std::string autocode_py(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                        const Eigen::MatrixXd& P, double xi, double bound) {
    LyapunovCertificate cert{LmiKind::Invariance, sym(P), {}, 0, 0.0, false, xi};
    return emit_source(autocode(statespace(A, B, C, D), cert, bound));
}

py::dict check_annotations_py(const std::string& source, double bound) {
    const auto rep = check_program(parse_source(source), bound);
    py::dict out;
    out["pass"] = rep.pass();
    py::list obligations;
    for (const auto& o : rep.outcomes) {
        py::dict jo;
        jo["label"] = o.label;
        jo["verdict"] = to_string(o.verdict);
        jo["margin"] = o.margin;
        jo["note"] = o.note;
        obligations.append(jo);
    }
    out["obligations"] = obligations;
    return out;
}

py::dict census_py(const std::vector<Eigen::MatrixXd>& samples) {
    const auto c = varying_entry_census(samples);
    py::dict out;
    out["varying"] = c.varying;
    out["constant_nonzero"] = c.constant_nonzero;
    out["zero"] = c.zero;
    out["total"] = c.total();
    return out;
}

py::dict fixture_py(const OperatingPoint& p) {
    py::dict out;
    py::dict eq;
    eq["NH_eq"] = p.equilibrium.NH_eq;
    eq["NL_eq"] = p.equilibrium.NL_eq;
    eq["Wf_eq"] = p.equilibrium.Wf_eq;
    eq["PLA_eq"] = p.equilibrium.PLA_eq;
    eq["NH_pct"] = p.equilibrium.NH_pct;
    eq["NL_pct"] = p.equilibrium.NL_pct;
    out["equilibrium"] = eq;
    auto ss = [](const StateSpace& s) {
        py::dict d;
        d["A"] = s.A;
        d["B"] = s.B;
        d["C"] = s.C;
        d["D"] = s.D;
        return d;
    };
    out["plant"] = ss(p.plant);
    out["controller"] = ss(p.controller);
    out["open_loop"] = ss(p.open_loop);
    out["closed_loop_A"] = p.closed_loop_A;
    out["gamma"] = p.gamma;
    return out;
}

}  // namespace

PYBIND11_MODULE(_gtv, m) {
    m.doc() = "verification toolchain core: eigensolvers, LMIs, ellipsoid calculus, "
              "annotated code emission/checking, closed-loop simulation";

    py::register_exception<InputError>(m, "InputError");
    py::register_exception<NumericError>(m, "NumericError");

    m.def("sym_eig", [](const Eigen::MatrixXd& M) {
        const auto r = sym_eig(sym(M));
        return py::make_tuple(r.values, r.vectors);
    });
    m.def("is_positive_definite", [](const Eigen::MatrixXd& M, double margin) {
        const auto r = is_positive_definite(sym(M), margin);
        return py::make_tuple(r.positive_definite, r.min_eigenvalue);
    }, py::arg("m"), py::arg("margin") = 0.0);
    m.def("condition_number", [](const Eigen::MatrixXd& M) {
        return condition_number(sym(M));
    });
    m.def("spectral_radius",
          [](const Eigen::MatrixXd& A) { return spectral_radius(A); });

    m.def("pump_statespace", [] {
        const auto p = pump_statespace();
        py::dict d;
        d["A"] = p.A;
        d["B"] = p.B;
        d["C"] = p.C;
        d["D"] = p.D;
        return d;
    });
    m.def("load_fixture_set", [](const std::string& dir) {
        py::dict out;
        for (const auto& [name, p] : load_fixture_set(dir))
            out[name.c_str()] = fixture_py(p);
        return out;
    });
    m.def("interconnect_closed_loop",
          [](const py::dict& plant, const py::dict& controller) {
              auto ss = [](const py::dict& d) {
                  return statespace(d["A"].cast<Eigen::MatrixXd>(),
                                    d["B"].cast<Eigen::MatrixXd>(),
                                    d["C"].cast<Eigen::MatrixXd>(),
                                    d["D"].cast<Eigen::MatrixXd>());
              };
              return interconnect_closed_loop(ss(plant), ss(controller),
                                              pump_statespace());
          });
    m.def("throttle_map", [](const std::string& dir, double pla) {
        const auto pts = load_fixture_set(dir);
        return throttle_map(pts, pla);
    });

    m.def("solve_lmi", &solve_py, py::arg("kind"), py::arg("vertices"),
          py::arg("xi") = 0.0, py::arg("gammas") = std::vector<double>{});
    m.def("check_certificate", &check_certificate_py, py::arg("kind"),
          py::arg("vertices"), py::arg("P"), py::arg("xi") = 0.0,
          py::arg("gammas") = std::vector<double>{});

    m.def("autocode", &autocode_py, py::arg("A"), py::arg("B"), py::arg("C"),
          py::arg("D"), py::arg("P"), py::arg("xi"), py::arg("bound") = 1.0);
    m.def("check_annotations", &check_annotations_py, py::arg("source"),
          py::arg("bound") = 1.0);

    m.def("varying_entry_census", &census_py);
    m.def("saturate", &saturate);

    m.def("simulate_csv", [](const std::string& config_json, const std::string& data_dir) {
        const auto cfg = parse_sim_config(config_json);
        return simulate(cfg, load_fixture_set(data_dir + "/appendix_d")).to_csv();
    });
}
