#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gtv/lmi.hpp"
#include "gtv/model.hpp"

namespace gtv {

/// lhs := sum coeff * var (+ constant). The emitted controller code is
/// strictly linear; the constant survives in the grammar for generality.
struct Assignment {
    std::string lhs;
    std::vector<std::pair<std::string, double>> terms;
    double constant = 0.0;

    bool operator==(const Assignment&) const = default;
};

/// Origin-centered ellipsoid {z : z^T Q^+ z <= 1} over named variables.
/// Q is PSD and may be singular (images of lower-dimensional sets).
struct VarEllipsoid {
    std::vector<std::string> vars;
    Eigen::MatrixXd Q;

    bool operator==(const VarEllipsoid& o) const {
        return vars == o.vars && Q.rows() == o.Q.rows() && Q.cols() == o.Q.cols() &&
               Q == o.Q;
    }
};

struct ProofTactic {
    // Unknown is constructible in memory so the checker can report it as
    // unsupported; the parser rejects unrecognized tactic names outright.
    enum Kind { AffineEllipsoid, SProcedure, Unknown } kind = AffineEllipsoid;
    double lambda = 0.0;  // SProcedure multiplier

    bool operator==(const ProofTactic&) const = default;
};

struct StepAnnotation {
    VarEllipsoid pre, post;
    ProofTactic tactic;

    bool operator==(const StepAnnotation&) const = default;
};

/// Straight-line annotated step function: declarations, statements, the
/// function-level ellipsoid contract and one annotation triple per statement.
struct AnnotatedProgram {
    std::string name = "controller_step";
    std::vector<std::string> state_vars;
    std::vector<std::string> input_vars;
    std::vector<std::string> output_vars;
    std::vector<std::string> local_vars;
    double input_bound = 1.0;
    VarEllipsoid contract_pre, contract_post;  // over state_vars
    std::vector<Assignment> statements;
    std::vector<StepAnnotation> annotations;   // one per statement

    void validate() const;  // declarations, arities, annotation count
    bool operator==(const AnnotatedProgram&) const = default;
};

struct AutocodeNames {
    std::string function_name = "controller_step";
    std::vector<std::string> states;   // empty -> x_0, x_1, ...
    std::vector<std::string> inputs;   // empty -> u_0, ...
    std::vector<std::string> outputs;  // empty -> y_0, ...
};

/// Emits the step function x+ = Ax + Bu, y = Cx + Du as scalar statements
/// with a forward-propagated ellipsoid annotation chain:
///  - function contract: {x : x^T P x <= 1} with Q = P^-1 from the certificate
///  - the bounded input joins the ellipsoid at its first use (SProcedure with
///    the certificate's xi); every other statement is an exact AffineEllipsoid
///    image, so the chain discharges with the certificate's own margin.
AnnotatedProgram autocode(const StateSpace& controller, const LyapunovCertificate& cert,
                          double input_bound = 1.0, const AutocodeNames& names = {});

/// Deterministic text form; byte-identical for identical programs.
std::string emit_source(const AnnotatedProgram& p);

/// Inverse of emit_source over the grammar in docs/annotation-grammar.md.
/// Throws InputError with line:column on syntax errors, unknown tactics and
/// undeclared variables.
AnnotatedProgram parse_source(const std::string& text);

}  // namespace gtv
