#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gtv/ellipsoid.hpp"
#include "gtv/model.hpp"

namespace gtv {

/// Which states of the per-step record a monitor ellipsoid covers.
enum class MonitorVars { ControllerStates, PlantStates, AllStates };

struct MonitorConfig {
    Ellipsoid ellipsoid;
    MonitorVars vars = MonitorVars::ControllerStates;
};

struct SimConfig {
    int duration = 100;                                // steps
    std::vector<std::pair<int, double>> pla_profile;   // (step, PLA degrees)
    std::string equilibrium = "idle";                  // point name or "scheduled"
    std::uint64_t seed = 0;
    double disturbance = 0.0;                          // command noise amplitude (%)
    double sample_period = 0.02;                       // trace timestamps only
    std::optional<MonitorConfig> monitor;
    std::optional<Eigen::VectorXd> initial_controller_state;
    std::optional<Eigen::VectorXd> initial_plant_state;  // deviations (%)

    void validate() const;
};

struct SimStep {
    double time = 0;
    Eigen::Vector4d x_plant;     // deviation states
    Eigen::VectorXd x_controller;
    double x_pump = 0;
    double wf_kg_hr = 0;         // absolute fuel flow
    double nh_pct = 0, nl_pct = 0;
    double nh_cmd_pct = 0, nl_cmd_pct = 0;
    double wp_pre_sat = 0, wp_post_sat = 0;  // pump rating before/after the limiter
    double monitor_margin = 0;   // level - quadratic form, when configured
};

struct SimTrace {
    std::vector<SimStep> steps;
    bool monitored = false;

    std::string to_csv() const;  // fixed documented column set
};

/// Deviation-coordinate closed-loop simulation with the output limiter in the
/// loop. "scheduled" interpolates the controller over measured NH between the
/// fixture points; a fixed point name uses that linearization throughout.
/// Equilibrium switching on PLA changes carries NH/NL/Wf continuity over.
SimTrace simulate(const SimConfig& cfg, const std::map<std::string, OperatingPoint>& pts);

struct MonitorReport {
    bool violated = false;
    int first_violation_step = -1;
    double worst_margin = 0;
};

/// Re-evaluates an ellipsoid invariant on a recorded trace.
MonitorReport monitor_invariant(const SimTrace& trace, const Ellipsoid& e,
                                MonitorVars vars);

SimConfig parse_sim_config(const std::string& json_text);
std::string serialize_sim_config(const SimConfig& cfg);

/// Static SVG plot of NH/NL vs command, fuel flow and the monitor margin.
std::string trace_svg(const SimTrace& trace);

}  // namespace gtv
