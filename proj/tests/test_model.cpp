#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "gtv/json_io.hpp"
#include "gtv/model.hpp"

using namespace gtv;

static const std::string kData = GTV_DATA_DIR;

TEST_CASE("load_fixture: named points, dimensions, equilibrium values") {
    const auto pts = load_fixture_set(kData + "/appendix_d");
    REQUIRE(pts.size() == 4);
    for (const char* k : {"idle", "mcr", "mcm", "top"}) REQUIRE(pts.count(k) == 1);

    const auto& idle = pts.at("idle");
    CHECK(idle.equilibrium.NH_eq == 39315.0);
    CHECK(idle.equilibrium.PLA_eq == 0.0);
    CHECK(idle.plant.A(0, 0) == 1.9746);
    CHECK(pts.at("top").equilibrium.Wf_eq == 112.4);

    for (const auto& [name, p] : pts) {
        CHECK(p.plant.states() == 4);
        CHECK(p.controller.states() == 11);
        CHECK(p.controller.inputs() == 3);
        CHECK(p.open_loop.states() == 16);
        CHECK(p.closed_loop_A.rows() == 16);
        CHECK(p.equilibrium.NH_eq / kNHRef ==
              doctest::Approx(p.equilibrium.NH_pct).epsilon(1e-3));
        CHECK(p.equilibrium.NL_eq / kNLRef ==
              doctest::Approx(p.equilibrium.NL_pct).epsilon(1e-3));
    }
}

TEST_CASE("fixture round trip is bit exact") {
    const auto p = load_fixture(kData + "/appendix_d/mcr.json");
    const std::string tmp = "/tmp/gtv_fixture_rt.json";
    write_file_atomic(tmp, serialize_fixture(p));
    const auto q = load_fixture(tmp);
    CHECK((p.plant.A - q.plant.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p.controller.B - q.controller.B).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p.open_loop.A - q.open_loop.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p.closed_loop_A - q.closed_loop_A).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.gamma == q.gamma);
    CHECK(p.equilibrium.Wf_eq == q.equilibrium.Wf_eq);
}

TEST_CASE("fixture schema violations are rejected with location") {
    const std::string tmp = "/tmp/gtv_fixture_bad.json";
    write_file_atomic(tmp, R"({"point":"idle"})");
    CHECK_THROWS_WITH_AS(load_fixture(tmp), doctest::Contains("missing key"), InputError);
    write_file_atomic(tmp, "{broken");
    CHECK_THROWS_AS(load_fixture(tmp), InputError);
}

TEST_CASE("pump state space") {
    const auto pump = pump_statespace();
    CHECK(pump.A(0, 0) == 0.8187);
    CHECK(pump.dc_gain()(0, 0) == doctest::Approx(1.2000).epsilon(1e-4));
    // impulse response step 1 is C*B
    CHECK((pump.C * pump.B)(0, 0) == doctest::Approx(0.21756));
}

TEST_CASE("spectral_radius") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d.diagonal() << 0.5, -0.9;
    CHECK(spectral_radius(d) == doctest::Approx(0.9));

    Eigen::MatrixXd rot(2, 2);
    rot << 0, -1, 1, 0;
    CHECK(spectral_radius(rot) == doctest::Approx(1.0));

    // idle plant NH block in companion form: roots of z^2 - 1.9746 z + 0.9747
    Eigen::MatrixXd comp(2, 2);
    comp << 0, 1, -0.9747, 1.9746;
    const double disc = std::sqrt(1.9746 * 1.9746 - 4 * 0.9747);
    const double root = (1.9746 + disc) / 2.0;
    CHECK(spectral_radius(comp) == doctest::Approx(root).epsilon(1e-10));
    CHECK(spectral_radius(comp) < 1.0);
}

TEST_CASE("interconnect: zero controller gains give a block-diagonal loop") {
    const auto pts = load_fixture_set(kData + "/appendix_d");
    auto ctrl = pts.at("idle").controller;
    ctrl.C.setZero();
    ctrl.D.setZero();
    const auto A = interconnect_closed_loop(pts.at("idle").plant, ctrl, pump_statespace());
    REQUIRE(A.rows() == 16);
    // no coupling out of the controller: pump row over controller states is zero
    CHECK(A.row(15).segment(4, 11).cwiseAbs().maxCoeff() == 0.0);
    // spectral radius equals the max of the isolated blocks
    const double rho_blocks =
        std::max({spectral_radius(pts.at("idle").plant.A), spectral_radius(ctrl.A),
                  spectral_radius(pump_statespace().A)});
    CHECK(spectral_radius(A) == doctest::Approx(rho_blocks).epsilon(1e-10));
}

TEST_CASE("interconnect: scaling chain 4100/160 * 3883 reaches the pump input") {
    const auto pts = load_fixture_set(kData + "/appendix_d");
    const auto& p = pts.at("idle");
    InterconnectScalings s;
    s.close_u1hat = false;  // keep Wc = Cc x + D [dNH dNL 0] for direct reading
    const auto A = interconnect_closed_loop(p.plant, p.controller, pump_statespace(), s);
    const double chain = (4100.0 / 160.0) * 3883.0;
    CHECK(chain == doctest::Approx(99501.875));
    // pump row couples to controller states through chain * Cc
    for (int j = 0; j < 11; ++j)
        CHECK(A(15, 4 + j) == doctest::Approx(chain * p.controller.C(0, j)));
    // plant improved by pump output through B_p * C_pump
    CHECK(A(0, 15) == doctest::Approx(p.plant.B(0, 0) * 0.21756));
}

TEST_CASE("interconnect: assembled closed loops and the print-precision limit") {
    // The four reassembled loops are NOT Schur: the fixture blocks are printed
    // to 4 decimals and the loop gain through the f1/derivative path exceeds 1
    // for every wiring consistent with the printed open/closed-loop structure.
    // The spectral radii are recorded here as facts of the shipped data; the
    // acceptance suite carries the (failing) < 1 criterion.
    const auto pts = load_fixture_set(kData + "/appendix_d");
    for (const auto& [name, p] : pts) {
        const auto A = interconnect_closed_loop(p.plant, p.controller, pump_statespace());
        const double rho = spectral_radius(A);
        MESSAGE(name << ": spectral radius of reassembled A^cl = " << rho);
        CHECK(rho > 1.0);   // documented data limitation
        CHECK(rho < 1.7);   // and it is the known mild instability, not garbage
    }
}

TEST_CASE("interconnect block-diagonal invariant with zeroed cross couplings") {
    // plant with zero B and controller with zero C/D: three decoupled blocks
    const auto pts = load_fixture_set(kData + "/appendix_d");
    auto plant = pts.at("mcm").plant;
    auto ctrl = pts.at("mcm").controller;
    plant.B.setZero();
    ctrl.B.setZero();
    ctrl.C.setZero();
    ctrl.D.setZero();
    const auto A = interconnect_closed_loop(plant, ctrl, pump_statespace());
    const double want = std::max({spectral_radius(plant.A), spectral_radius(ctrl.A),
                                  spectral_radius(pump_statespace().A)});
    CHECK(spectral_radius(A) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("remove_sample_delay") {
    SUBCASE("no delayed channels returns the system unchanged") {
        DelayedController dc;
        dc.A = Eigen::MatrixXd::Constant(1, 1, 0.7);
        dc.B_y = Eigen::MatrixXd::Constant(1, 2, 0.1);
        dc.B_u1 = Eigen::MatrixXd(1, 0);
        dc.B_u2 = Eigen::MatrixXd(1, 0);
        dc.C_u2 = Eigen::MatrixXd(0, 1);
        dc.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
        dc.D = Eigen::MatrixXd::Zero(1, 2);
        const auto ss = remove_sample_delay(dc);
        CHECK(ss.A(0, 0) == 0.7);
        CHECK(ss.inputs() == 2);
    }
    SUBCASE("scalar internal feedback x+ = a x + b w-, w = x reduces to a + b") {
        DelayedController dc;
        dc.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
        dc.B_y = Eigen::MatrixXd(1, 0);
        dc.B_u1 = Eigen::MatrixXd(1, 0);
        dc.B_u2 = Eigen::MatrixXd::Constant(1, 1, 0.25);
        dc.C_u2 = Eigen::MatrixXd::Constant(1, 1, 1.0);
        dc.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
        dc.D = Eigen::MatrixXd(1, 0);
        const auto ss = remove_sample_delay(dc);
        CHECK(ss.A(0, 0) == doctest::Approx(0.75));
        CHECK(ss.states() == 1);
    }
    SUBCASE("controller-shaped channels keep the state dimension at 11") {
        const auto pts = load_fixture_set(kData + "/appendix_d");
        const auto& c = pts.at("idle").controller;
        DelayedController dc;
        dc.A = c.A;
        dc.B_y = c.B.leftCols(2);
        dc.B_u1 = c.B.col(2);
        dc.B_u2 = Eigen::MatrixXd::Zero(11, 3);
        dc.C_u2 = Eigen::MatrixXd::Zero(3, 11);
        dc.C_u2(0, 4) = dc.C_u2(1, 5) = dc.C_u2(2, 10) = 1.0;  // anti-windup states
        dc.C = c.C;
        dc.D = c.D;
        const auto ss = remove_sample_delay(dc);
        CHECK(ss.states() == 11);
        CHECK(ss.inputs() == 3);
        CHECK((ss.B - c.B).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("bad channel dimensions are rejected") {
        DelayedController dc;
        dc.A = Eigen::MatrixXd::Identity(2, 2) * 0.5;
        dc.B_y = Eigen::MatrixXd::Zero(2, 1);
        dc.B_u1 = Eigen::MatrixXd(2, 0);
        dc.B_u2 = Eigen::MatrixXd::Zero(2, 1);
        dc.C_u2 = Eigen::MatrixXd::Zero(2, 2);  // 2 rows != B_u2 cols
        dc.C = Eigen::MatrixXd::Identity(1, 2);
        dc.D = Eigen::MatrixXd::Zero(1, 1);
        CHECK_THROWS_AS(remove_sample_delay(dc), InputError);
    }
}

TEST_CASE("scheduled model interpolation and throttle map") {
    const auto pts = load_fixture_set(kData + "/appendix_d");
    ScheduledModel sched;
    for (const char* k : {"idle", "mcr", "mcm", "top"}) {
        sched.alphas.push_back(pts.at(k).equilibrium.NH_pct);
        sched.systems.push_back(pts.at(k).controller);
    }
    sched.labels = controller_state_labels();
    sched.validate();

    // exact at anchors, affine between them
    const auto at_mcr = sched.at(pts.at("mcr").equilibrium.NH_pct);
    CHECK((at_mcr.A - pts.at("mcr").controller.A).cwiseAbs().maxCoeff() < 1e-12);
    const double mid = 0.5 * (sched.alphas[1] + sched.alphas[2]);
    const auto at_mid = sched.at(mid);
    CHECK(at_mid.A(2, 0) ==
          doctest::Approx(0.5 * (sched.systems[1].A(2, 0) + sched.systems[2].A(2, 0))));

    // throttle map hits the published anchors and moves between them
    auto [nh0, nl0] = throttle_map(pts, 0.0);
    CHECK(nh0 == doctest::Approx(77.5153));
    auto [nh20, nl20] = throttle_map(pts, 20.0);
    CHECK(nh20 == doctest::Approx(95.7866));
    CHECK(nl20 == doctest::Approx(88.3124));
    auto [nh10, nl10] = throttle_map(pts, 10.0);
    CHECK(nh10 == doctest::Approx(0.5 * (77.5153 + 95.7866)));
    auto [nh99, nl99] = throttle_map(pts, 99.0);  // clamped to the top anchor
    CHECK(nh99 == doctest::Approx(101.0075));
}

TEST_CASE("state space validation") {
    CHECK_THROWS_AS(StateSpace(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 1),
                               Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 1)),
                    InputError);
    CHECK_THROWS_AS(StateSpace(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 1),
                               Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 1)),
                    InputError);
}
