#include "gtv/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "gtv/json_io.hpp"
#include "json.hpp"

namespace gtv {

namespace {

constexpr double kButeeLo = 0.07, kButeeHi = 0.098;
constexpr double kWcToWp = 4100.0 / 160.0;
constexpr double kWpToV = 3883.0;
constexpr double kPumpA = 0.8187, kPumpC = 0.21756;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// equilibrium pump rating backed out of the fixture fuel flow:
// Wf = C/(1-A) * v, v = 3883 Wp - 244.06
double wp_equilibrium(double wf_eq) {
    const double v_eq = wf_eq * (1.0 - kPumpA) / kPumpC;
    return (v_eq + 244.06) / kWpToV;
}

const OperatingPoint& nearest_by_pla(const std::map<std::string, OperatingPoint>& pts,
                                     double pla) {
    const OperatingPoint* best = nullptr;
    double dist = 1e300;
    for (const auto& [_, p] : pts) {
        const double d = std::abs(p.equilibrium.PLA_eq - pla);
        if (d < dist || (d == dist && best && p.equilibrium.PLA_eq <
                                          best->equilibrium.PLA_eq)) {
            dist = d;
            best = &p;
        }
    }
    if (!best) throw InputError("simulate: empty fixture set");
    return *best;
}

}  // namespace

void SimConfig::validate() const {
    if (duration < 1) throw InputError("SimConfig: duration must be >= 1");
    int prev = -1;
    for (const auto& [step, pla] : pla_profile) {
        if (step <= prev) throw InputError("SimConfig: profile steps must ascend");
        if (pla < 0.0 || pla > 40.0)
            throw InputError("SimConfig: PLA must lie in [0, 40] degrees");
        prev = step;
    }
}

SimTrace simulate(const SimConfig& cfg, const std::map<std::string, OperatingPoint>& pts) {
    cfg.validate();
    const bool scheduled = cfg.equilibrium == "scheduled";
    if (!scheduled && !pts.count(cfg.equilibrium))
        throw InputError("simulate: unknown equilibrium \"" + cfg.equilibrium + "\"");

    ScheduledModel sched;
    if (scheduled) {
        std::vector<std::pair<double, const OperatingPoint*>> by_alpha;
        for (const auto& [_, p] : pts) by_alpha.emplace_back(p.equilibrium.NH_pct, &p);
        std::sort(by_alpha.begin(), by_alpha.end());
        for (const auto& [a, p] : by_alpha) {
            sched.alphas.push_back(a);
            sched.systems.push_back(p->controller);
        }
        sched.labels = controller_state_labels();
        sched.validate();
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> noise(-1.0, 1.0);

    double pla = cfg.pla_profile.empty() ? 0.0 : cfg.pla_profile.front().second;
    const OperatingPoint* active =
        scheduled ? &nearest_by_pla(pts, pla) : &pts.at(cfg.equilibrium);

    Eigen::Vector4d xp = Eigen::Vector4d::Zero();
    Eigen::VectorXd xc = Eigen::VectorXd::Zero(11);
    double xq = 0.0;
    if (cfg.initial_plant_state) {
        if (cfg.initial_plant_state->size() != 4)
            throw InputError("simulate: initial plant state must have 4 entries");
        xp = *cfg.initial_plant_state;
    }
    if (cfg.initial_controller_state) {
        if (cfg.initial_controller_state->size() != 11)
            throw InputError("simulate: initial controller state must have 11 entries");
        xc = *cfg.initial_controller_state;
    }

    SimTrace trace;
    trace.monitored = cfg.monitor.has_value();
    trace.steps.reserve(cfg.duration);
    size_t profile_idx = 0;

    for (int k = 0; k < cfg.duration; ++k) {
        while (profile_idx < cfg.pla_profile.size() &&
               cfg.pla_profile[profile_idx].first <= k) {
            pla = cfg.pla_profile[profile_idx].second;
            ++profile_idx;
        }
        // equilibrium switching carries NH/NL/Wf continuity into the new
        // deviation coordinates (only in fixed-point mode the plant tracks PLA)
        const OperatingPoint* want =
            scheduled ? &nearest_by_pla(pts, pla) : &pts.at(cfg.equilibrium);
        if (want != active) {
            const auto &eo = active->equilibrium, &en = want->equilibrium;
            xp(0) += eo.NH_pct - en.NH_pct;
            xp(2) += eo.NL_pct - en.NL_pct;
            xq += (eo.Wf_eq - en.Wf_eq) / kPumpC;
            active = want;
        }
        const auto& eq = active->equilibrium;
        const double wp_eq = wp_equilibrium(eq.Wf_eq);

        auto [nh_cmd, nl_cmd] = throttle_map(pts, pla);
        if (cfg.disturbance != 0.0) {
            nh_cmd += cfg.disturbance * noise(rng);
            nl_cmd += cfg.disturbance * noise(rng);
        }
        const double nh_abs = eq.NH_pct + xp(0);
        const double nl_abs = eq.NL_pct + xp(2);
        const double d_nh = nh_cmd - nh_abs;
        const double d_nl = nl_cmd - nl_abs;

        const StateSpace ctrl = scheduled ? sched.at(nh_abs) : active->controller;
        const double wf_abs = eq.Wf_eq + kPumpC * xq;

        // controller output with the limiter feedback resolved exactly:
        // Wc = Cc xc + D1 dNH + D2 dNL + D3 u1hat,
        // u1hat = (sat(Wp_eq + 25.625 Wc_dev) - Wp_eq) / 25.625
        const double lin = (ctrl.C * xc)(0) + ctrl.D(0, 0) * d_nh + ctrl.D(0, 1) * d_nl;
        const double d3 = ctrl.D(0, 2);
        double wc_dev = lin / (1.0 - d3);  // unsaturated branch
        double wp_pre = wp_eq + kWcToWp * wc_dev;
        if (wp_pre < kButeeLo) {
            wc_dev = lin + d3 * (kButeeLo - wp_eq) / kWcToWp;
            wp_pre = wp_eq + kWcToWp * wc_dev;
        } else if (wp_pre > kButeeHi) {
            wc_dev = lin + d3 * (kButeeHi - wp_eq) / kWcToWp;
            wp_pre = wp_eq + kWcToWp * wc_dev;
        }
        const double wp_post = saturate(wp_pre, kButeeLo, kButeeHi);
        const double u1hat = (wp_post - wp_eq) / kWcToWp;
        const double v_dev = kWpToV * (wp_post - wp_eq);

        SimStep rec;
        rec.time = k * cfg.sample_period;
        rec.x_plant = xp;
        rec.x_controller = xc;
        rec.x_pump = xq;
        rec.wf_kg_hr = wf_abs;
        rec.nh_pct = nh_abs;
        rec.nl_pct = nl_abs;
        rec.nh_cmd_pct = nh_cmd;
        rec.nl_cmd_pct = nl_cmd;
        rec.wp_pre_sat = wp_pre;
        rec.wp_post_sat = wp_post;
        if (cfg.monitor) {
            Eigen::VectorXd z;
            switch (cfg.monitor->vars) {
                case MonitorVars::ControllerStates: z = xc; break;
                case MonitorVars::PlantStates: z = xp; break;
                case MonitorVars::AllStates:
                    z.resize(16);
                    z << xp, xc, xq;
                    break;
            }
            rec.monitor_margin = contains(cfg.monitor->ellipsoid, z).margin;
        }
        trace.steps.push_back(std::move(rec));

        Eigen::Vector3d u(d_nh, d_nl, u1hat);
        const Eigen::VectorXd xc_next = ctrl.A * xc + ctrl.B * u;
        const Eigen::Vector4d xp_next =
            active->plant.A * xp + active->plant.B * (kPumpC * xq);
        const double xq_next = kPumpA * xq + v_dev;
        xc = xc_next;
        xp = xp_next;
        xq = xq_next;
        if (!xc.allFinite() || !xp.allFinite() || !std::isfinite(xq) ||
            xc.cwiseAbs().maxCoeff() > 1e120 || xp.cwiseAbs().maxCoeff() > 1e120)
            throw NumericError("simulate: state overflow at step " + std::to_string(k + 1));
    }
    return trace;
}

MonitorReport monitor_invariant(const SimTrace& trace, const Ellipsoid& e,
                                MonitorVars vars) {
    MonitorReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < trace.steps.size(); ++k) {
        const auto& s = trace.steps[k];
        Eigen::VectorXd z;
        switch (vars) {
            case MonitorVars::ControllerStates: z = s.x_controller; break;
            case MonitorVars::PlantStates: z = s.x_plant; break;
            case MonitorVars::AllStates:
                z.resize(s.x_plant.size() + s.x_controller.size() + 1);
                z << s.x_plant, s.x_controller, s.x_pump;
                break;
        }
        const double margin = contains(e, z).margin;
        if (margin < rep.worst_margin) rep.worst_margin = margin;
        if (margin < 0 && !rep.violated) {
            rep.violated = true;
            rep.first_violation_step = static_cast<int>(k);
        }
    }
    return rep;
}

std::string SimTrace::to_csv() const {
    std::ostringstream os;
    os << "step,time,NH_pct,NL_pct,NH_cmd_pct,NL_cmd_pct,Wf_kg_hr,Wp_pre_sat,"
          "Wp_post_sat,pump_state";
    for (int i = 0; i < 4; ++i) os << ",xp_" << i;
    for (int i = 0; i < 11; ++i) os << ",xc_" << i;
    if (monitored) os << ",monitor_margin";
    os << "\n";
    for (size_t k = 0; k < steps.size(); ++k) {
        const auto& s = steps[k];
        os << k << "," << num(s.time) << "," << num(s.nh_pct) << "," << num(s.nl_pct)
           << "," << num(s.nh_cmd_pct) << "," << num(s.nl_cmd_pct) << ","
           << num(s.wf_kg_hr) << "," << num(s.wp_pre_sat) << "," << num(s.wp_post_sat)
           << "," << num(s.x_pump);
        for (int i = 0; i < 4; ++i) os << "," << num(s.x_plant(i));
        for (int i = 0; i < 11; ++i) os << "," << num(s.x_controller(i));
        if (monitored) os << "," << num(s.monitor_margin);
        os << "\n";
    }
    return os.str();
}

SimConfig parse_sim_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("sim config parse: ") + e.what());
    }
    SimConfig cfg;
    cfg.duration = j.value("duration", 100);
    if (j.contains("pla_profile"))
        for (const auto& e : j["pla_profile"])
            cfg.pla_profile.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
    cfg.equilibrium = j.value("equilibrium", std::string("idle"));
    cfg.seed = j.value("seed", std::uint64_t(0));
    cfg.disturbance = j.value("disturbance", 0.0);
    cfg.sample_period = j.value("sample_period", 0.02);
    if (j.contains("monitor")) {
        const auto& jm = j["monitor"];
        MonitorConfig mc{parse_ellipsoid(jm.at("ellipsoid").dump()),
                         MonitorVars::ControllerStates};
        const std::string v = jm.value("vars", std::string("controller"));
        if (v == "controller") mc.vars = MonitorVars::ControllerStates;
        else if (v == "plant") mc.vars = MonitorVars::PlantStates;
        else if (v == "all") mc.vars = MonitorVars::AllStates;
        else throw InputError("sim config: unknown monitor vars \"" + v + "\"");
        cfg.monitor = std::move(mc);
    }
    if (j.contains("initial_controller_state"))
        cfg.initial_controller_state = json_to_vector(j["initial_controller_state"]);
    if (j.contains("initial_plant_state"))
        cfg.initial_plant_state = json_to_vector(j["initial_plant_state"]);
    cfg.validate();
    return cfg;
}

std::string serialize_sim_config(const SimConfig& cfg) {
    nlohmann::json j;
    j["duration"] = cfg.duration;
    j["pla_profile"] = nlohmann::json::array();
    for (const auto& [s, pla] : cfg.pla_profile)
        j["pla_profile"].push_back(nlohmann::json::array({s, pla}));
    j["equilibrium"] = cfg.equilibrium;
    j["seed"] = cfg.seed;
    j["disturbance"] = cfg.disturbance;
    j["sample_period"] = cfg.sample_period;
    if (cfg.monitor) {
        j["monitor"]["ellipsoid"] =
            nlohmann::json::parse(serialize_ellipsoid(cfg.monitor->ellipsoid));
        j["monitor"]["vars"] = cfg.monitor->vars == MonitorVars::ControllerStates
                                   ? "controller"
                                   : cfg.monitor->vars == MonitorVars::PlantStates
                                         ? "plant"
                                         : "all";
    }
    if (cfg.initial_controller_state)
        j["initial_controller_state"] = vector_to_json(*cfg.initial_controller_state);
    if (cfg.initial_plant_state)
        j["initial_plant_state"] = vector_to_json(*cfg.initial_plant_state);
    return j.dump(1);
}

namespace {

void polyline(std::ostringstream& os, const std::vector<double>& ys, int x0, int y0,
              int w, int h, const char* color) {
    if (ys.empty()) return;
    double lo = ys[0], hi = ys[0];
    for (double y : ys) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    if (hi - lo < 1e-12) {
        lo -= 1.0;
        hi += 1.0;
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (size_t i = 0; i < ys.size(); ++i) {
        const double px = x0 + double(i) / std::max<size_t>(ys.size() - 1, 1) * w;
        const double py = y0 + h - (ys[i] - lo) / (hi - lo) * h;
        os << px << "," << py << " ";
    }
    os << "\"/>\n";
}

}  // namespace

std::string trace_svg(const SimTrace& trace) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"620\">\n";
    std::vector<double> nh, nl, nhc, nlc, wf, margin;
    for (const auto& s : trace.steps) {
        nh.push_back(s.nh_pct);
        nl.push_back(s.nl_pct);
        nhc.push_back(s.nh_cmd_pct);
        nlc.push_back(s.nl_cmd_pct);
        wf.push_back(s.wf_kg_hr);
        if (trace.monitored) margin.push_back(s.monitor_margin);
    }
    os << "<text x=\"10\" y=\"16\">spool speeds vs commands (percent)</text>\n";
    polyline(os, nh, 10, 24, 780, 160, "#1f77b4");
    polyline(os, nhc, 10, 24, 780, 160, "#9ecae1");
    polyline(os, nl, 10, 24, 780, 160, "#d62728");
    polyline(os, nlc, 10, 24, 780, 160, "#ff9896");
    os << "<text x=\"10\" y=\"216\">fuel flow (kg/hr)</text>\n";
    polyline(os, wf, 10, 224, 780, 160, "#2ca02c");
    if (trace.monitored) {
        os << "<text x=\"10\" y=\"416\">monitor margin</text>\n";
        polyline(os, margin, 10, 424, 780, 160, "#7f3fbf");
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace gtv
