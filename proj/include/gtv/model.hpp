#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gtv/errors.hpp"
#include "gtv/tolerances.hpp"

namespace gtv {

/// Discrete-time linear system x+ = Ax + Bu, y = Cx + Du.
struct StateSpace {
    Eigen::MatrixXd A, B, C, D;
    std::optional<double> sample_period;  // seconds, metadata only

    StateSpace() = default;
    StateSpace(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c, Eigen::MatrixXd d);

    int states() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }
    /// C (I - A)^-1 B + D
    Eigen::MatrixXd dc_gain() const;
};

struct GainPoint {
    double alpha = 0.0;             // scheduling parameter (NH % of reference)
    Eigen::Vector4d theta;          // [Kp, Ki, Kd, Td]
};

/// Family of systems indexed by strictly increasing scheduling values.
struct ScheduledModel {
    std::vector<double> alphas;
    std::vector<StateSpace> systems;
    std::vector<std::string> labels;  // state names

    void validate() const;
    /// Piecewise-linear interpolation in alpha; linear extrapolation at the ends.
    StateSpace at(double alpha) const;
};

struct EquilibriumPoint {
    std::string name;
    double NH_eq = 0, NL_eq = 0;     // RPM
    double Wf_eq = 0;                // kg/hr
    double PLA_eq = 0;               // degrees
    double NH_pct = 0, NL_pct = 0;   // percent of reference speeds
};

constexpr double kNHRef = 507.19;
constexpr double kNLRef = 436.36;

/// One Appendix-D operating point: plant/controller/open-loop/closed-loop
/// linearizations plus the equilibrium record.
struct OperatingPoint {
    EquilibriumPoint equilibrium;
    StateSpace plant;        // n=4
    StateSpace controller;   // n=11, inputs [dNH, dNL, u1hat]
    StateSpace open_loop;    // n=16, as printed (shape/structure fixture)
    Eigen::MatrixXd closed_loop_A;  // n=16, as printed
    double gamma = 0;        // H-inf bound of this open loop
    double open_loop_scale = 1, closed_loop_scale = 1;  // print metadata
};

/// Loads one fixture file. Throws InputError with the offending location.
OperatingPoint load_fixture(const std::string& path, const Tolerances& tol = {});
std::string serialize_fixture(const OperatingPoint& p);

/// All four named points from a directory containing idle/mcr/mcm/top.json.
std::map<std::string, OperatingPoint> load_fixture_set(const std::string& dir,
                                                       const Tolerances& tol = {});

/// One-state realization of the fuel pump transfer 0.21756 / (z - 0.8187).
StateSpace pump_statespace();

/// Gains applied to the controller output on its way into the pump drive.
struct InterconnectScalings {
    double controller_output_to_pump_pct = 4100.0 / 160.0;
    double pump_pct_to_drive = 3883.0;
    /// dNH = sign * (command - measurement); -1 keeps command-minus-measurement
    /// with zero command in deviation coordinates.
    double feedback_sign = -1.0;
    /// Close the Butee feedback channel u1hat = Wc through its (linear,
    /// unsaturated) algebraic loop. Off reproduces the printed closed loops,
    /// which leave that channel open.
    bool close_u1hat = true;
};

/// Deviation-variable closed loop: 4 plant + 11 controller + 1 pump states.
/// Affine offsets cancel in deviation coordinates, so the result is linear.
Eigen::MatrixXd interconnect_closed_loop(const StateSpace& plant,
                                         const StateSpace& controller,
                                         const StateSpace& pump,
                                         const InterconnectScalings& s = {});

/// max |eigenvalue| of a general square matrix.
double spectral_radius(const Eigen::MatrixXd& A, const Tolerances& tol = {});

/// Controller with one-sample-delayed feedback channels:
///   x+ = A x + B_y y + B_u1 u1hat_delayed + B_u2 (C_u2 x)_delayed
/// u2 is internal state feedback; u1hat is the bounded exogenous channel.
struct DelayedController {
    Eigen::MatrixXd A, B_y, B_u1, B_u2, C_u2, C, D;
};

/// Removes the one-sample delays: internal feedback is shifted one sample
/// forward and absorbed into A; the bounded channel's delay is dropped.
/// Result has inputs [y; u1hat] and the same state dimension.
StateSpace remove_sample_delay(const DelayedController& dc);

/// Piecewise-linear throttle map through the four fixture equilibria:
/// PLA degrees -> (NH %, NL %) commands. Clamps outside [0, 40] deg.
std::pair<double, double> throttle_map(const std::map<std::string, OperatingPoint>& pts,
                                       double pla_deg);

/// Controller state names in fixture order.
const std::vector<std::string>& controller_state_labels();

}  // namespace gtv
