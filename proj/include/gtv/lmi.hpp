#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gtv/numerics.hpp"
#include "gtv/tolerances.hpp"

namespace gtv {

enum class LmiKind { Invariance, BoundedReal, CommonLyapunov };

std::string to_string(LmiKind k);
LmiKind lmi_kind_from_string(const std::string& s);

struct LmiVertex {
    Eigen::MatrixXd A, B, C, D;  // unused members stay empty per kind
};

/// One of the three LMI families, shared unknown P of dimension n:
///   Invariance:     [A'PA - P + xi P, A'PB; B'PA, B'PB - xi I] < 0
///   BoundedReal:    [A'PA - P + C'C, (B'PA + D'C)'; ., -(g I - D'D - B'PB)] <= 0
///   CommonLyapunov: A'PA - P < 0
struct LmiProblem {
    LmiKind kind = LmiKind::CommonLyapunov;
    std::vector<LmiVertex> vertices;
    double xi = 0.0;             // Invariance only, in (0, 1)
    std::vector<double> gammas;  // BoundedReal only, one per vertex
    int n = 0;

    int block_dim(size_t vertex) const;
    /// Constraint block of one vertex evaluated at P.
    Eigen::MatrixXd block(size_t vertex, const Eigen::MatrixXd& P) const;
};

LmiProblem build_invariance_lmi(const std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>>& ab,
                                double xi);
LmiProblem build_bounded_real_lmi(const std::vector<LmiVertex>& vertices,
                                  const std::vector<double>& gammas);
LmiProblem build_common_lyapunov_lmi(const std::vector<Eigen::MatrixXd>& vertices);

struct LyapunovCertificate {
    LmiKind kind = LmiKind::CommonLyapunov;
    SymMatrix P;
    std::vector<double> margins;  // lam_max per vertex block, all < 0
    int iterations = 0;
    double final_margin = 0.0;    // max over vertices
    bool normalized = false;      // lam_max(P) scaled to 1 (CommonLyapunov)
    double xi = 0.0;              // carried for Invariance certificates
};

enum class SolveStatus { Feasible, Infeasible, Undecided };

struct SolveResult {
    SolveStatus status = SolveStatus::Undecided;
    std::optional<LyapunovCertificate> certificate;
    double best_margin = 0.0;  // best achieved max-margin (infeasible/undecided)
    int iterations = 0;
    std::string detail;
};

/// Log-det barrier interior point on: minimize t s.t. F_i(P) <= t I,
/// eps I <= P <= c I, with diagonal power-of-two balancing for conditioning.
/// Never trusted blindly: final margins are re-evaluated in the original
/// coordinates, and check_certificate stays an independent path.
SolveResult solve(const LmiProblem& problem, const Tolerances& tol = {});

struct VertexMargin {
    size_t vertex = 0;
    double lam_max = 0.0;
    bool pass = false;
};

struct CertificateCheck {
    bool pass = false;
    std::vector<VertexMargin> margins;
    double p_min_eigenvalue = 0.0;
    bool well_posed = true;  // BRL: g I - D'D - B'PB > 0
};

/// Evaluates every constraint block with the given P; never calls the solver.
CertificateCheck check_certificate(const LmiProblem& problem, const SymMatrix& P,
                                   const Tolerances& tol = {});

LmiProblem parse_lmi_problem(const std::string& json_text);
std::string serialize_lmi_problem(const LmiProblem& p);
LyapunovCertificate parse_certificate(const std::string& json_text);
std::string serialize_certificate(const LyapunovCertificate& c);

}  // namespace gtv
