#include "gtv/model.hpp"

#include <algorithm>
#include <cmath>

#include "gtv/json_io.hpp"
#include "json.hpp"

namespace gtv {

StateSpace::StateSpace(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c,
                       Eigen::MatrixXd d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
    if (A.rows() != A.cols()) throw InputError("StateSpace: A must be square");
    if (B.rows() != A.rows()) throw InputError("StateSpace: B row count != state count");
    if (C.cols() != A.rows()) throw InputError("StateSpace: C column count != state count");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw InputError("StateSpace: D must be outputs x inputs");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite())
        throw InputError("StateSpace: non-finite entry");
}

Eigen::MatrixXd StateSpace::dc_gain() const {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(states(), states());
    return C * (I - A).partialPivLu().solve(B) + D;
}

void ScheduledModel::validate() const {
    if (alphas.size() != systems.size())
        throw InputError("ScheduledModel: alphas/systems size mismatch");
    if (alphas.empty()) throw InputError("ScheduledModel: empty");
    for (size_t i = 1; i < alphas.size(); ++i)
        if (!(alphas[i] > alphas[i - 1]))
            throw InputError("ScheduledModel: alphas must be strictly increasing");
    for (const auto& s : systems)
        if (s.states() != systems[0].states() || s.inputs() != systems[0].inputs() ||
            s.outputs() != systems[0].outputs())
            throw InputError("ScheduledModel: member dimensions differ");
}

StateSpace ScheduledModel::at(double alpha) const {
    validate();
    if (systems.size() == 1) return systems[0];
    size_t i = 0;
    if (alpha >= alphas[alphas.size() - 2])
        i = alphas.size() - 2;
    else
        while (i + 2 < alphas.size() && alphas[i + 1] <= alpha) ++i;
    const double t = (alpha - alphas[i]) / (alphas[i + 1] - alphas[i]);
    const StateSpace &a = systems[i], &b = systems[i + 1];
    return StateSpace(a.A + t * (b.A - a.A), a.B + t * (b.B - a.B),
                      a.C + t * (b.C - a.C), a.D + t * (b.D - a.D));
}

namespace {

StateSpace statespace_from_json(const nlohmann::json& j, const std::string& where) {
    for (const char* k : {"A", "B", "C", "D"})
        if (!j.contains(k)) throw InputError(where + ": missing matrix \"" + k + "\"");
    try {
        return StateSpace(json_to_matrix(j["A"]), json_to_matrix(j["B"]),
                          json_to_matrix(j["C"]), json_to_matrix(j["D"]));
    } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
    }
}

nlohmann::json statespace_to_json(const StateSpace& s) {
    nlohmann::json j;
    j["A"] = matrix_to_json(s.A);
    j["B"] = matrix_to_json(s.B);
    j["C"] = matrix_to_json(s.C);
    j["D"] = matrix_to_json(s.D);
    return j;
}

}  // namespace

OperatingPoint load_fixture(const std::string& path, const Tolerances&) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    const std::string where = path;
    for (const char* k : {"point", "equilibrium", "plant", "controller", "open_loop", "closed_loop"})
        if (!j.contains(k)) throw InputError(where + ": missing key \"" + std::string(k) + "\"");

    OperatingPoint p;
    const auto& je = j["equilibrium"];
    for (const char* k : {"NH_eq", "NL_eq", "Wf_eq", "PLA_eq", "NH_pct", "NL_pct"})
        if (!je.contains(k)) throw InputError(where + ": equilibrium missing \"" + std::string(k) + "\"");
    p.equilibrium = {j["point"].get<std::string>(), je["NH_eq"].get<double>(),
                     je["NL_eq"].get<double>(),    je["Wf_eq"].get<double>(),
                     je["PLA_eq"].get<double>(),   je["NH_pct"].get<double>(),
                     je["NL_pct"].get<double>()};
    const auto& e = p.equilibrium;
    if (std::abs(e.NH_eq / kNHRef - e.NH_pct) > 1e-3 * std::abs(e.NH_pct))
        throw InputError(where + ": NH_pct does not match NH_eq / NH_ref");
    if (std::abs(e.NL_eq / kNLRef - e.NL_pct) > 1e-3 * std::abs(e.NL_pct))
        throw InputError(where + ": NL_pct does not match NL_eq / NL_ref");

    p.plant = statespace_from_json(j["plant"], where + ": plant");
    p.controller = statespace_from_json(j["controller"], where + ": controller");
    p.open_loop = statespace_from_json(j["open_loop"], where + ": open_loop");
    if (!j["open_loop"].contains("gamma")) throw InputError(where + ": open_loop missing gamma");
    p.gamma = j["open_loop"]["gamma"].get<double>();
    p.open_loop_scale = j["open_loop"].value("scale", 1.0);
    try {
        p.closed_loop_A = json_to_matrix(j["closed_loop"]["A"]);
    } catch (const InputError& err) {
        throw InputError(where + ": closed_loop: " + err.what());
    }
    p.closed_loop_scale = j["closed_loop"].value("scale", 1.0);

    if (p.plant.states() != 4) throw InputError(where + ": plant must have 4 states");
    if (p.controller.states() != 11) throw InputError(where + ": controller must have 11 states");
    if (p.open_loop.states() != 16) throw InputError(where + ": open loop must have 16 states");
    if (p.closed_loop_A.rows() != 16 || p.closed_loop_A.cols() != 16)
        throw InputError(where + ": closed loop must be 16x16");
    return p;
}

std::string serialize_fixture(const OperatingPoint& p) {
    nlohmann::json j;
    j["point"] = p.equilibrium.name;
    j["equilibrium"] = {{"NH_eq", p.equilibrium.NH_eq}, {"NL_eq", p.equilibrium.NL_eq},
                        {"Wf_eq", p.equilibrium.Wf_eq}, {"PLA_eq", p.equilibrium.PLA_eq},
                        {"NH_pct", p.equilibrium.NH_pct}, {"NL_pct", p.equilibrium.NL_pct}};
    j["plant"] = statespace_to_json(p.plant);
    j["controller"] = statespace_to_json(p.controller);
    j["open_loop"] = statespace_to_json(p.open_loop);
    j["open_loop"]["gamma"] = p.gamma;
    j["open_loop"]["scale"] = p.open_loop_scale;
    j["closed_loop"] = {{"A", matrix_to_json(p.closed_loop_A)}, {"scale", p.closed_loop_scale}};
    return j.dump(1);
}

std::map<std::string, OperatingPoint> load_fixture_set(const std::string& dir,
                                                       const Tolerances& tol) {
    std::map<std::string, OperatingPoint> out;
    for (const char* name : {"idle", "mcr", "mcm", "top"})
        out.emplace(name, load_fixture(dir + "/" + name + ".json", tol));
    return out;
}

StateSpace pump_statespace() {
    Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
    a << 0.8187;
    b << 1.0;
    c << 0.21756;
    d << 0.0;
    return StateSpace(a, b, c, d);
}

Eigen::MatrixXd interconnect_closed_loop(const StateSpace& plant,
                                         const StateSpace& controller,
                                         const StateSpace& pump,
                                         const InterconnectScalings& s) {
    const int np = plant.states(), nc = controller.states(), nq = pump.states();
    if (plant.outputs() < 2)
        throw InputError("interconnect: plant must expose NH and NL outputs");
    if (controller.inputs() != 3)
        throw InputError("interconnect: controller must take [dNH, dNL, u1hat]");
    if (controller.outputs() != 1 || pump.inputs() != 1 || pump.outputs() != 1 ||
        plant.inputs() != 1)
        throw InputError("interconnect: scalar Wc -> pump -> Wf chain expected");

    const double chain = s.controller_output_to_pump_pct * s.pump_pct_to_drive;
    const int n = np + nc + nq;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);

    // measurement feedback rows: dNH, dNL as functions of plant state
    const Eigen::MatrixXd fb = s.feedback_sign * plant.C.topRows(2);  // 2 x np

    const Eigen::MatrixXd By = controller.B.leftCols(2);
    const Eigen::MatrixXd Bu1 = controller.B.col(2);
    const double D_nh = controller.D(0, 0), D_nl = controller.D(0, 1),
                 D_u1 = controller.D(0, 2);

    // Wc as a row over [x_p, x_c]; the u1hat = Wc loop is algebraic through D_u1
    Eigen::RowVectorXd wc_xc = controller.C.row(0);
    Eigen::RowVectorXd wc_xp = D_nh * fb.row(0) + D_nl * fb.row(1);
    if (s.close_u1hat) {
        if (std::abs(1.0 - D_u1) < 1e-12)
            throw NumericError("interconnect: u1hat loop is ill-posed (D == 1)");
        const double k = 1.0 / (1.0 - D_u1);
        wc_xc *= k;
        wc_xp *= k;
    }

    A.block(0, 0, np, np) = plant.A;
    A.block(0, np + nc, np, nq) = plant.B * pump.C;

    A.block(np, np, nc, nc) = controller.A;
    A.block(np, 0, nc, np) = By * fb;
    if (s.close_u1hat) {
        A.block(np, np, nc, nc) += Bu1 * wc_xc;
        A.block(np, 0, nc, np) += Bu1 * wc_xp;
    }

    A.block(np + nc, np + nc, nq, nq) = pump.A;
    A.block(np + nc, np, nq, nc) = pump.B * chain * wc_xc;
    A.block(np + nc, 0, nq, np) = pump.B * chain * wc_xp;
    return A;
}

double spectral_radius(const Eigen::MatrixXd& A, const Tolerances&) {
    if (A.rows() != A.cols()) throw InputError("spectral_radius: matrix must be square");
    if (!A.allFinite()) throw InputError("spectral_radius: non-finite entry");
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericError("spectral_radius: eigensolver did not converge");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

StateSpace remove_sample_delay(const DelayedController& dc) {
    const Eigen::Index n = dc.A.rows();
    if (dc.A.cols() != n) throw InputError("remove_sample_delay: A must be square");
    if (dc.B_y.rows() != n || dc.C.cols() != n)
        throw InputError("remove_sample_delay: B_y/C dimensions");
    Eigen::MatrixXd A = dc.A;
    if (dc.B_u2.size() > 0 || dc.C_u2.size() > 0) {
        if (dc.B_u2.rows() != n || dc.C_u2.cols() != n ||
            dc.B_u2.cols() != dc.C_u2.rows())
            throw InputError("remove_sample_delay: u2 channel dimensions do not match");
        // u2 = C_u2 x fed back with one sample delay: shifting those dynamics
        // one sample forward replaces C_u2 x_{k-1} by C_u2 x_k
        A += dc.B_u2 * dc.C_u2;
    }
    Eigen::MatrixXd B(n, dc.B_y.cols() + dc.B_u1.cols());
    B << dc.B_y, dc.B_u1;
    Eigen::MatrixXd D;
    if (dc.D.size() > 0) {
        if (dc.D.rows() != dc.C.rows())
            throw InputError("remove_sample_delay: D rows != outputs");
        if (dc.D.cols() == B.cols()) {
            D = dc.D;
        } else if (dc.D.cols() == dc.B_y.cols()) {
            D = Eigen::MatrixXd::Zero(dc.C.rows(), B.cols());
            D.leftCols(dc.B_y.cols()) = dc.D;
        } else {
            throw InputError("remove_sample_delay: D columns match neither y nor [y; u1hat]");
        }
    } else {
        D = Eigen::MatrixXd::Zero(dc.C.rows(), B.cols());
    }
    return StateSpace(A, B, dc.C, D);
}

std::pair<double, double> throttle_map(const std::map<std::string, OperatingPoint>& pts,
                                       double pla_deg) {
    std::vector<const EquilibriumPoint*> eq;
    for (const auto& [_, p] : pts) eq.push_back(&p.equilibrium);
    std::sort(eq.begin(), eq.end(),
              [](auto* a, auto* b) { return a->PLA_eq < b->PLA_eq; });
    if (eq.size() < 2) throw InputError("throttle_map: need at least two equilibria");
    const double lo = eq.front()->PLA_eq, hi = eq.back()->PLA_eq;
    const double pla = std::clamp(pla_deg, lo, hi);
    size_t i = 0;
    while (i + 2 < eq.size() && eq[i + 1]->PLA_eq <= pla) ++i;
    const double t = (pla - eq[i]->PLA_eq) / (eq[i + 1]->PLA_eq - eq[i]->PLA_eq);
    return {eq[i]->NH_pct + t * (eq[i + 1]->NH_pct - eq[i]->NH_pct),
            eq[i]->NL_pct + t * (eq[i + 1]->NL_pct - eq[i]->NL_pct)};
}

const std::vector<std::string>& controller_state_labels() {
    static const std::vector<std::string> kLabels = {
        "delay_b0_memory",   "delay_b1_memory",   "delay_eps0_memory",
        "delay_eps1_memory", "delay_c0_memory",   "delay_c1_memory",
        "delay_f0_memory",   "delay_f1_memory",   "delay_b2_memory",
        "delay_eps2_memory", "delay_c2_memory"};
    return kLabels;
}

}  // namespace gtv
