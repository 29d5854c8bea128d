#pragma once

#include <string>
#include <vector>

#include "gtv/autocoder.hpp"
#include "gtv/tolerances.hpp"

namespace gtv {

/// One annotation triple to discharge. input_vars lists the declared bounded
/// inputs so the checker can split statement coefficients into (A, B).
struct Obligation {
    VarEllipsoid pre, post;
    Assignment statement;
    ProofTactic tactic;
    std::vector<std::string> input_vars;
};

enum class Verdict { Discharged, Failed, UnsupportedTactic };

struct ObligationOutcome {
    std::string label;
    Verdict verdict = Verdict::Failed;
    double margin = 0.0;  // positive slack when discharged
    std::string note;
};

/// Exact affine image of pre (updated coordinate substituted, new coordinate
/// appended) contained in post. Containment is the generalized eigenvalue
/// test lam_max(Q_img, Q_post) <= 1 + tol via Cholesky congruence, with a
/// PSD-difference fallback when Q_post is singular.
ObligationOutcome discharge_affine(const Obligation& ob, const Tolerances& tol = {});

/// S-procedure step: pre /\ ||u|| <= input_bound implies post for the
/// successor map reconstructed from the statement. Uses the invariance block
/// matrix with the given multiplier when the post shape is invertible, and
/// the equivalent Q-form comparison otherwise.
ObligationOutcome discharge_sprocedure(const Obligation& ob, double input_bound,
                                       double lambda, const Tolerances& tol = {});

struct CheckReport {
    std::vector<ObligationOutcome> outcomes;  // statements + final containment
    bool pass() const {
        for (const auto& o : outcomes)
            if (o.verdict != Verdict::Discharged) return false;
        return !outcomes.empty();
    }
    size_t failed_count() const {
        size_t n = 0;
        for (const auto& o : outcomes) n += o.verdict != Verdict::Discharged;
        return n;
    }
};

/// Discharges every annotation triple plus the final containment obligation
/// (last ellipsoid inside the function postcondition). The chain linkage
/// (previous post implies next pre) is folded into each statement obligation,
/// so a discharged report composes into the function contract.
CheckReport check_program(const AnnotatedProgram& p, double input_bound,
                          const Tolerances& tol = {});

std::string to_string(Verdict v);
std::string serialize_report(const CheckReport& r);

}  // namespace gtv
