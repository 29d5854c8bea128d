#include "gtv/proofcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gtv/numerics.hpp"
#include "json.hpp"

namespace gtv {

namespace {

int index_of(const std::vector<std::string>& vars, const std::string& v) {
    const auto it = std::find(vars.begin(), vars.end(), v);
    return it == vars.end() ? -1 : static_cast<int>(it - vars.begin());
}

double lam_max_sym(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double lam_min_sym(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// decisively positive definite (safe to invert); near-singular shapes take
// the PSD comparison path instead of trusting a borderline factorization
bool decisively_pd(const Eigen::MatrixXd& Q) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Q + Q.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const double hi = es.eigenvalues().maxCoeff();
    return es.eigenvalues().minCoeff() > 1e-10 * std::max(hi, 1e-300);
}

// containment of ell(Q_img) in ell(Q_post): lam_max(Q_img, Q_post) <= 1 + tol
struct Containment {
    bool ok;
    double margin;
};

Containment contained(const Eigen::MatrixXd& q_img, const Eigen::MatrixXd& q_post,
                      double tol) {
    if (decisively_pd(q_post)) {
        Eigen::LLT<Eigen::MatrixXd> llt(q_post);
        if (llt.info() == Eigen::Success) {
            const Eigen::MatrixXd W = llt.matrixL().solve(
                Eigen::MatrixXd::Identity(q_post.rows(), q_post.cols()));
            const double lam = lam_max_sym(W * q_img * W.transpose());
            return {lam <= 1.0 + tol, 1.0 + tol - lam};
        }
    }
    // singular post: Q_img <= (1+tol) Q_post as a PSD inequality, with a
    // diagonal congruence so heterogeneous coordinate scales stay comparable
    const Eigen::VectorXd d =
        (q_img.diagonal().cwiseAbs() + q_post.diagonal().cwiseAbs()).cwiseMax(1e-300)
            .cwiseSqrt()
            .cwiseInverse();
    const Eigen::MatrixXd M =
        d.asDiagonal() * ((1.0 + tol) * q_post - q_img) * d.asDiagonal();
    const Eigen::MatrixXd np = d.asDiagonal() * q_post * d.asDiagonal();
    const double scale = std::max(1.0, np.cwiseAbs().maxCoeff());
    const double lam = lam_min_sym(M);
    return {lam >= -tol * scale, lam / scale + tol};
}

// split the statement into rows over (pre vars | input vars)
struct SplitRows {
    Eigen::RowVectorXd on_pre, on_inputs;
};

SplitRows split_statement(const Obligation& ob) {
    SplitRows s;
    s.on_pre = Eigen::RowVectorXd::Zero(ob.pre.vars.size());
    s.on_inputs = Eigen::RowVectorXd::Zero(ob.input_vars.size());
    for (const auto& [v, c] : ob.statement.terms) {
        const int ip = index_of(ob.pre.vars, v);
        if (ip >= 0) {
            s.on_pre(ip) += c;
            continue;
        }
        const int iu = index_of(ob.input_vars, v);
        if (iu >= 0) {
            s.on_inputs(iu) += c;
            continue;
        }
        throw InputError("obligation: statement reads \"" + v +
                         "\" which is neither in the pre ellipsoid nor an input");
    }
    return s;
}

}  // namespace

ObligationOutcome discharge_affine(const Obligation& ob, const Tolerances& tol) {
    ObligationOutcome out;
    out.label = "affine " + ob.statement.lhs;
    if (ob.tactic.kind != ProofTactic::AffineEllipsoid)
        throw InputError("discharge_affine: wrong tactic kind");
    if (ob.statement.constant != 0.0) {
        out.verdict = Verdict::Failed;
        out.note = "nonzero affine offset is outside the origin-centered predicate set";
        return out;
    }
    const auto rows = split_statement(ob);
    if (rows.on_inputs.size() > 0 && rows.on_inputs.cwiseAbs().maxCoeff() > 0.0)
        throw InputError("discharge_affine: statement consumes fresh bounded input");

    const int m = static_cast<int>(ob.pre.vars.size());
    const int ilhs = index_of(ob.pre.vars, ob.statement.lhs);
    Eigen::MatrixXd L;
    if (ilhs >= 0) {
        L = Eigen::MatrixXd::Identity(m, m);
        L.row(ilhs) = rows.on_pre;
    } else {
        L = Eigen::MatrixXd::Zero(m + 1, m);
        L.topLeftCorner(m, m).setIdentity();
        L.row(m) = rows.on_pre;
    }
    // post variable order must be the pre order (with lhs appended when new)
    std::vector<std::string> expect = ob.pre.vars;
    if (ilhs < 0) expect.push_back(ob.statement.lhs);
    if (ob.post.vars != expect)
        throw InputError("discharge_affine: post variable vector does not match the "
                         "updated pre vector");

    const Eigen::MatrixXd q_img = L * ob.pre.Q * L.transpose();
    const auto c = contained(q_img, ob.post.Q, tol.containment);
    out.verdict = c.ok ? Verdict::Discharged : Verdict::Failed;
    out.margin = c.margin;
    return out;
}

ObligationOutcome discharge_sprocedure(const Obligation& ob, double input_bound,
                                       double lambda, const Tolerances& tol) {
    ObligationOutcome out;
    out.label = "sprocedure " + ob.statement.lhs;
    if (ob.tactic.kind != ProofTactic::SProcedure)
        throw InputError("discharge_sprocedure: wrong tactic kind");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw InputError("discharge_sprocedure: multiplier must lie in (0, 1)");
    if (!(input_bound > 0)) throw InputError("discharge_sprocedure: bad input bound");
    if (ob.statement.constant != 0.0) {
        out.verdict = Verdict::Failed;
        out.note = "nonzero affine offset is outside the origin-centered predicate set";
        return out;
    }
    const auto rows = split_statement(ob);
    const int m = static_cast<int>(ob.pre.vars.size());
    const int q = static_cast<int>(ob.input_vars.size());

    // successor map z = A_s v + B_s u over the post vector (v, u, lhs)
    std::vector<std::string> expect = ob.pre.vars;
    expect.insert(expect.end(), ob.input_vars.begin(), ob.input_vars.end());
    expect.push_back(ob.statement.lhs);
    if (ob.post.vars != expect)
        throw InputError("discharge_sprocedure: post variable vector must extend pre "
                         "by the inputs and the assigned variable");
    Eigen::MatrixXd A_s = Eigen::MatrixXd::Zero(m + q + 1, m);
    Eigen::MatrixXd B_s = Eigen::MatrixXd::Zero(m + q + 1, q);
    A_s.topLeftCorner(m, m).setIdentity();
    B_s.block(m, 0, q, q).setIdentity();
    A_s.row(m + q) = rows.on_pre;
    B_s.row(m + q) = rows.on_inputs;
    const Eigen::MatrixXd B_rho = input_bound * B_s;

    if (decisively_pd(ob.post.Q) && decisively_pd(ob.pre.Q)) {
        // invariance block matrix with P2 = Q_post^-1 and P1 = Q_pre^-1:
        //   [A' P2 A - (1-l) P1,  A' P2 B; B' P2 A, B' P2 B - l I] <= 0
        Eigen::LLT<Eigen::MatrixXd> post_llt(ob.post.Q);
        Eigen::LLT<Eigen::MatrixXd> pre_llt(ob.pre.Q);
        const int d = m + q + 1;
        const Eigen::MatrixXd P2 =
            post_llt.solve(Eigen::MatrixXd::Identity(d, d));
        const Eigen::MatrixXd P1 = pre_llt.solve(Eigen::MatrixXd::Identity(m, m));
        Eigen::MatrixXd M(m + q, m + q);
        M.topLeftCorner(m, m) =
            A_s.transpose() * P2 * A_s - (1.0 - lambda) * P1;
        M.topRightCorner(m, q) = A_s.transpose() * P2 * B_rho;
        M.bottomLeftCorner(q, m) = M.topRightCorner(m, q).transpose();
        M.bottomRightCorner(q, q) = B_rho.transpose() * P2 * B_rho -
                                    lambda * Eigen::MatrixXd::Identity(q, q);
        const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
        const double lam = lam_max_sym(M);
        out.verdict = lam <= tol.containment * scale ? Verdict::Discharged : Verdict::Failed;
        out.margin = -lam / scale;
        return out;
    }
    // singular shapes: the equivalent Q-form condition
    //   A Q_pre A' / (1-l) + (rho^2/l) B B'  <=  Q_post
    const Eigen::MatrixXd q_req = A_s * ob.pre.Q * A_s.transpose() / (1.0 - lambda) +
                                  (1.0 / lambda) * B_rho * B_rho.transpose();
    const auto c = contained(q_req, ob.post.Q, tol.containment);
    out.verdict = c.ok ? Verdict::Discharged : Verdict::Failed;
    out.margin = c.margin;
    out.note = "singular shape; Q-form comparison";
    return out;
}

CheckReport check_program(const AnnotatedProgram& p, double input_bound,
                          const Tolerances& tol) {
    p.validate();
    CheckReport rep;
    const VarEllipsoid* prev = &p.contract_pre;
    for (size_t i = 0; i < p.statements.size(); ++i) {
        const auto& ann = p.annotations[i];
        ObligationOutcome out;
        out.label = "step_" + std::to_string(i);
        try {
            // chain linkage: what held after the previous statement must imply
            // this annotation's precondition
            bool chain_ok = true;
            if (prev->vars != ann.pre.vars) {
                chain_ok = false;
                out.note = "pre variable vector does not continue the chain";
            } else {
                const auto c = contained(prev->Q, ann.pre.Q, tol.containment);
                if (!c.ok) {
                    chain_ok = false;
                    out.note = "established set is not contained in the stated pre";
                }
            }
            if (!chain_ok) {
                out.verdict = Verdict::Failed;
            } else {
                Obligation ob{ann.pre, ann.post, p.statements[i], ann.tactic,
                              p.input_vars};
                ObligationOutcome inner;
                switch (ann.tactic.kind) {
                    case ProofTactic::AffineEllipsoid:
                        inner = discharge_affine(ob, tol);
                        break;
                    case ProofTactic::SProcedure:
                        inner = discharge_sprocedure(ob, input_bound, ann.tactic.lambda,
                                                     tol);
                        break;
                    default:
                        inner.verdict = Verdict::UnsupportedTactic;
                        inner.note = "tactic not recognized by this checker";
                }
                out.verdict = inner.verdict;
                out.margin = inner.margin;
                if (!inner.note.empty()) out.note = inner.note;
            }
        } catch (const InputError& e) {
            out.verdict = Verdict::Failed;
            out.note = e.what();
        }
        rep.outcomes.push_back(std::move(out));
        prev = &ann.post;
    }

    // final obligation: the last established ellipsoid, restricted to the
    // contract variables, lies inside the function postcondition
    ObligationOutcome fin;
    fin.label = "post_containment";
    try {
        const auto& post = p.contract_post;
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(post.vars.size(), prev->vars.size());
        bool ok = true;
        for (size_t i = 0; i < post.vars.size(); ++i) {
            const int idx = index_of(prev->vars, post.vars[i]);
            if (idx < 0) {
                ok = false;
                fin.note = "contract variable " + post.vars[i] +
                           " is absent from the final ellipsoid";
                break;
            }
            S(i, idx) = 1.0;
        }
        if (ok) {
            const Eigen::MatrixXd qf = S * prev->Q * S.transpose();
            const auto c = contained(qf, post.Q, tol.containment);
            fin.verdict = c.ok ? Verdict::Discharged : Verdict::Failed;
            fin.margin = c.margin;
        } else {
            fin.verdict = Verdict::Failed;
        }
    } catch (const InputError& e) {
        fin.verdict = Verdict::Failed;
        fin.note = e.what();
    }
    rep.outcomes.push_back(std::move(fin));
    return rep;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Discharged: return "discharged";
        case Verdict::Failed: return "failed";
        case Verdict::UnsupportedTactic: return "unsupported-tactic";
    }
    return "?";
}

std::string serialize_report(const CheckReport& r) {
    nlohmann::json j;
    j["pass"] = r.pass();
    j["obligations"] = nlohmann::json::array();
    for (const auto& o : r.outcomes) {
        nlohmann::json jo;
        jo["label"] = o.label;
        jo["verdict"] = to_string(o.verdict);
        jo["margin"] = o.margin;
        if (!o.note.empty()) jo["note"] = o.note;
        j["obligations"].push_back(std::move(jo));
    }
    return j.dump(1);
}

}  // namespace gtv
