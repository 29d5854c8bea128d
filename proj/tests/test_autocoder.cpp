#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "gtv/autocoder.hpp"
#include "gtv/lmi.hpp"
#include "gtv/model.hpp"

using namespace gtv;

namespace {

std::mt19937_64 rng(41);

StateSpace random_controller(int n, int q, int p) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd A(n, n), B(n, q), C(p, n), D(p, q);
    for (int i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
    for (int i = 0; i < B.size(); ++i) B.data()[i] = 0.3 * g(rng);
    for (int i = 0; i < C.size(); ++i) C.data()[i] = g(rng);
    for (int i = 0; i < D.size(); ++i) D.data()[i] = 0.2 * g(rng);
    const double rho = spectral_radius(A);
    A *= (0.3 + 0.4 * double(rng() % 100) / 100.0) / std::max(rho, 1e-9);
    return StateSpace(A, B, C, D);
}

LyapunovCertificate certify(const StateSpace& sys, double xi) {
    const auto r = solve(build_invariance_lmi({{sys.A, sys.B}}, xi));
    REQUIRE_MESSAGE(r.status == SolveStatus::Feasible, r.detail);
    return *r.certificate;
}

}  // namespace

TEST_CASE("autocode 1-state contraction: single assignment, affine tactic") {
    Eigen::MatrixXd A(1, 1), B(1, 0), C(0, 1), D(0, 0);
    A << 0.5;
    const StateSpace sys(A, B, C, D);
    LyapunovCertificate cert{LmiKind::Invariance, SymMatrix::identity(1),
                             {}, 0, -0.1, false, 0.5};
    const auto prog = autocode(sys, cert);
    REQUIRE(prog.statements.size() == 1);
    CHECK(prog.statements[0].lhs == prog.state_vars[0]);
    CHECK(prog.annotations[0].tactic.kind == ProofTactic::AffineEllipsoid);
    CHECK(prog.contract_pre.Q(0, 0) == doctest::Approx(1.0));
    // forward image shrinks to 0.25 and sits inside the contract
    CHECK(prog.annotations[0].post.Q(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("autocode scalar with input: SProcedure at the consuming statement") {
    Eigen::MatrixXd A(1, 1), B(1, 1), C(0, 1), D(0, 1);
    A << 0.5;
    B << 0.5;
    Eigen::MatrixXd P(1, 1);
    P << 0.5;
    LyapunovCertificate cert{LmiKind::Invariance, SymMatrix(P), {}, 0, -0.05, false, 0.5};
    const StateSpace sys(A, B, C, D);
    const auto prog = autocode(sys, cert, 1.0);
    // the input-consuming update runs through a temp, then commits
    REQUIRE(prog.statements.size() == 2);
    CHECK(prog.annotations[0].tactic.kind == ProofTactic::SProcedure);
    CHECK(prog.annotations[0].tactic.lambda == 0.5);
    CHECK(prog.annotations[0].post.vars.size() == 3);  // (x, u, temp)
    CHECK(prog.annotations[1].tactic.kind == ProofTactic::AffineEllipsoid);
    // exact final image: Q_f = A Q A'/(1-xi) + B B'/xi = 1.5, inside Q0 = 2
    const auto& fin = prog.annotations[1].post;
    const int ix = 0;  // x_0 keeps its slot
    CHECK(fin.Q(ix, ix) == doctest::Approx(1.5));
}

TEST_CASE("autocode controller fixture uses the delay-memory names in order") {
    const auto pts = load_fixture_set(std::string(GTV_DATA_DIR) + "/appendix_d");
    // the certificate covers the hull over the scheduling range [85, 106];
    // MCR sits inside it (idle, at 77.5, does not)
    const auto& ctrl = pts.at("mcr").controller;
    ScheduledModel sched;
    for (const char* k : {"idle", "mcr", "mcm", "top"}) {
        sched.alphas.push_back(pts.at(k).equilibrium.NH_pct);
        sched.systems.push_back(pts.at(k).controller);
    }
    const auto lo = sched.at(85.0), hi = sched.at(106.0);
    const auto r = solve(build_invariance_lmi({{lo.A, lo.B}, {hi.A, hi.B}}, 0.02354));
    REQUIRE(r.status == SolveStatus::Feasible);

    AutocodeNames names;
    names.function_name = "pla_step";
    names.states = controller_state_labels();
    const auto prog = autocode(ctrl, *r.certificate, 1.0, names);
    REQUIRE(prog.state_vars.size() == 11);
    CHECK(prog.state_vars[0] == "delay_b0_memory");
    CHECK(prog.state_vars[2] == "delay_eps0_memory");
    CHECK(prog.state_vars[8] == "delay_b2_memory");
    CHECK(prog.state_vars[10] == "delay_c2_memory");
    CHECK(prog.contract_pre.vars == controller_state_labels());
    // 1 output + 11 temps + 11 commits
    CHECK(prog.statements.size() == 23);
    // the bounded input enters the chain exactly once
    int sproc = 0;
    for (const auto& a : prog.annotations) sproc += a.tactic.kind == ProofTactic::SProcedure;
    CHECK(sproc == 1);
}

TEST_CASE("autocode rejects mismatched certificates") {
    const auto sys = random_controller(3, 1, 1);
    LyapunovCertificate wrong_dim{LmiKind::Invariance, SymMatrix::identity(2),
                                  {}, 0, -0.1, false, 0.2};
    CHECK_THROWS_AS(autocode(sys, wrong_dim), InputError);
    LyapunovCertificate wrong_kind{LmiKind::CommonLyapunov, SymMatrix::identity(3),
                                   {}, 0, -0.1, false, 0.2};
    CHECK_THROWS_AS(autocode(sys, wrong_kind), InputError);
    Eigen::MatrixXd notpd = Eigen::MatrixXd::Zero(3, 3);
    notpd.diagonal() << 1.0, 1.0, -1.0;
    LyapunovCertificate bad_p{LmiKind::Invariance, SymMatrix(notpd), {}, 0, -0.1, false, 0.2};
    CHECK_THROWS_AS(autocode(sys, bad_p), InputError);
}

TEST_CASE("emission is deterministic and structured") {
    const auto sys = random_controller(3, 2, 1);
    const auto cert = certify(sys, 0.1);
    const auto prog = autocode(sys, cert);
    const std::string s1 = emit_source(prog);
    const std::string s2 = emit_source(prog);
    CHECK(s1 == s2);
    CHECK(s1.find("requires in_ellipsoidQ(QMat_0,") != std::string::npos);
    CHECK(s1.find("ensures in_ellipsoidQ(QMat_1,") != std::string::npos);
    CHECK(s1.find("assumes in_ball(") != std::string::npos);
    CHECK(s1.find("PROOF_TACTIC (use_strategy (SProcedure(") != std::string::npos);
    CHECK(s1.find("matrix_of_3x3_scalar") != std::string::npos);
}

TEST_CASE("empty statement list emits contracts only and parses back") {
    AnnotatedProgram p;
    p.name = "nop";
    p.state_vars = {"a", "b"};
    p.contract_pre = {{"a", "b"}, Eigen::MatrixXd::Identity(2, 2)};
    p.contract_post = p.contract_pre;
    const std::string text = emit_source(p);
    CHECK(text.find("void nop(void)") != std::string::npos);
    const auto back = parse_source(text);
    CHECK(back == p);
}

TEST_CASE("one assignment produces exactly one behavior block") {
    Eigen::MatrixXd A(1, 1), B(1, 0), C(0, 1), D(0, 0);
    A << 0.7;
    LyapunovCertificate cert{LmiKind::Invariance, SymMatrix::identity(1),
                             {}, 0, -0.1, false, 0.3};
    const auto text = emit_source(autocode(StateSpace(A, B, C, D), cert));
    size_t count = 0, pos = 0;
    while ((pos = text.find("behavior step_", pos)) != std::string::npos) {
        ++count;
        pos += 1;
    }
    CHECK(count == 1);
}

TEST_CASE("parse(emit(p)) == p over randomized programs") {
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + int(rng() % 5);
        const int q = int(rng() % 3);
        const int p_out = int(rng() % 2);
        const auto sys = random_controller(n, q, p_out);
        const auto cert = certify(sys, 0.05 + 0.3 * double(rng() % 100) / 100.0);
        const auto prog = autocode(sys, cert, 1.0);
        const auto back = parse_source(emit_source(prog));
        CHECK(back == prog);
    }
}

TEST_CASE("parser rejects broken inputs with positions") {
    const auto sys = random_controller(2, 1, 1);
    const auto prog = autocode(sys, certify(sys, 0.2));
    const std::string good = emit_source(prog);

    SUBCASE("misspelled predicate") {
        std::string bad = good;
        bad.replace(bad.find("in_ellipsoidQ"), 13, "in_ellipsoidX");
        CHECK_THROWS_WITH_AS(parse_source(bad), doctest::Contains("parse error at"),
                             InputError);
    }
    SUBCASE("unknown tactic name") {
        std::string bad = good;
        const auto at = bad.find("SProcedure(");
        REQUIRE(at != std::string::npos);
        bad.replace(at, 10, "Sorcerizer");
        CHECK_THROWS_WITH_AS(parse_source(bad), doctest::Contains("unknown proof tactic"),
                             InputError);
    }
    SUBCASE("undeclared variable in an ellipsoid vector") {
        std::string bad = good;
        const auto vec_at = bad.find("vect_of_");
        const auto name_at = bad.find("x_0", vec_at);
        REQUIRE(name_at != std::string::npos);
        bad.replace(name_at, 3, "gho");
        CHECK_THROWS_WITH_AS(parse_source(bad), doctest::Contains("undeclared"),
                             InputError);
    }
    SUBCASE("truncated file") {
        CHECK_THROWS_AS(parse_source(good.substr(0, good.size() / 2)), InputError);
    }
}

TEST_CASE("valid-pointer clauses are accepted by the parser") {
    AnnotatedProgram p;
    p.state_vars = {"a"};
    p.contract_pre = {{"a"}, Eigen::MatrixXd::Identity(1, 1)};
    p.contract_post = p.contract_pre;
    std::string text = emit_source(p);
    const std::string marker = "ensures in_ellipsoidQ(QMat_1, vect_of_1_scalar(a));\n";
    const auto at = text.find(marker);
    REQUIRE(at != std::string::npos);
    text.insert(at + marker.size(), "    requires \\valid(_io_) && \\valid(_state_);\n");
    const auto back = parse_source(text);
    CHECK(back.state_vars == p.state_vars);
}

TEST_CASE("program validation catches structural breakage") {
    AnnotatedProgram p;
    p.state_vars = {"a"};
    p.contract_pre = {{"a"}, Eigen::MatrixXd::Identity(1, 1)};
    p.contract_post = p.contract_pre;
    Assignment st;
    st.lhs = "nope";
    st.terms = {{"a", 1.0}};
    p.statements.push_back(st);
    p.annotations.push_back({p.contract_pre, p.contract_pre, {}});
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("undeclared"), InputError);
}
