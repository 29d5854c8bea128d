#include "gtv/autocoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "gtv/numerics.hpp"

namespace gtv {

void AnnotatedProgram::validate() const {
    std::set<std::string> decls;
    for (const auto* list : {&state_vars, &input_vars, &output_vars, &local_vars})
        for (const auto& v : *list)
            if (!decls.insert(v).second)
                throw InputError("AnnotatedProgram: duplicate declaration of " + v);
    auto check_ell = [&](const VarEllipsoid& e, const std::string& where) {
        if (e.Q.rows() != e.Q.cols() ||
            e.Q.rows() != static_cast<Eigen::Index>(e.vars.size()))
            throw InputError("AnnotatedProgram: " + where + " shape mismatch");
        for (const auto& v : e.vars)
            if (!decls.count(v))
                throw InputError("AnnotatedProgram: " + where +
                                 " references undeclared variable " + v);
    };
    check_ell(contract_pre, "pre contract");
    check_ell(contract_post, "post contract");
    if (annotations.size() != statements.size())
        throw InputError("AnnotatedProgram: need exactly one annotation per statement");
    for (size_t i = 0; i < statements.size(); ++i) {
        if (!decls.count(statements[i].lhs))
            throw InputError("AnnotatedProgram: assignment to undeclared variable " +
                             statements[i].lhs);
        for (const auto& [v, c] : statements[i].terms)
            if (!decls.count(v))
                throw InputError("AnnotatedProgram: statement " + std::to_string(i) +
                                 " reads undeclared variable " + v);
        check_ell(annotations[i].pre, "annotation " + std::to_string(i) + " pre");
        check_ell(annotations[i].post, "annotation " + std::to_string(i) + " post");
    }
}

// ---------------------------------------------------------------------------
// autocode: forward ellipsoid propagation
// ---------------------------------------------------------------------------
namespace {

std::vector<std::string> default_names(const std::vector<std::string>& given,
                                       const std::string& prefix, int count) {
    if (!given.empty()) {
        if (static_cast<int>(given.size()) != count)
            throw InputError("autocode: name list for " + prefix + " has wrong length");
        return given;
    }
    std::vector<std::string> out;
    for (int i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

int index_of(const std::vector<std::string>& vars, const std::string& v) {
    const auto it = std::find(vars.begin(), vars.end(), v);
    return it == vars.end() ? -1 : static_cast<int>(it - vars.begin());
}

}  // namespace

AnnotatedProgram autocode(const StateSpace& controller, const LyapunovCertificate& cert,
                          double input_bound, const AutocodeNames& names) {
    if (cert.kind != LmiKind::Invariance)
        throw InputError("autocode: certificate kind must be invariance");
    const int n = controller.states(), q = controller.inputs(), p = controller.outputs();
    if (cert.P.n() != n)
        throw InputError("autocode: certificate dimension " + std::to_string(cert.P.n()) +
                         " != controller state dimension " + std::to_string(n));
    if (!(input_bound > 0)) throw InputError("autocode: input bound must be > 0");
    if (!(cert.xi > 0.0 && cert.xi < 1.0))
        throw InputError("autocode: certificate xi must lie in (0, 1)");
    const auto peig = sym_eig(cert.P);
    if (peig.values(0) <= 0) throw InputError("autocode: certificate P is not PD");
    const Eigen::MatrixXd Q0 = peig.vectors * peig.values.cwiseInverse().asDiagonal() *
                               peig.vectors.transpose();

    AnnotatedProgram prog;
    prog.name = names.function_name;
    prog.state_vars = default_names(names.states, "x_", n);
    prog.input_vars = default_names(names.inputs, "u_", q);
    prog.output_vars = default_names(names.outputs, "y_", p);
    prog.input_bound = input_bound;
    prog.contract_pre = {prog.state_vars, Q0};
    prog.contract_post = {prog.state_vars, Q0};

    // statement schedule: outputs on the old state, then new-state temps,
    // then commits; a single-state system updates in place
    struct Planned {
        Assignment a;
        Eigen::RowVectorXd on_inputs;
    };
    std::vector<Planned> plan;
    auto linear = [&](const std::string& lhs, const Eigen::RowVectorXd& cs,
                      const Eigen::RowVectorXd& ci) {
        Planned pl;
        pl.a.lhs = lhs;
        for (int j = 0; j < n; ++j)
            if (cs(j) != 0.0) pl.a.terms.emplace_back(prog.state_vars[j], cs(j));
        for (int j = 0; j < q; ++j)
            if (ci(j) != 0.0) pl.a.terms.emplace_back(prog.input_vars[j], ci(j));
        pl.on_inputs = ci;
        return pl;
    };
    for (int i = 0; i < p; ++i)
        plan.push_back(linear(prog.output_vars[i], controller.C.row(i), controller.D.row(i)));
    const bool single_autonomous =
        n == 1 && (q == 0 || controller.B.row(0).cwiseAbs().maxCoeff() == 0.0);
    if (single_autonomous) {
        // in-place update; input-consuming updates go through a temp so the
        // S-procedure step always introduces a fresh coordinate
        plan.push_back(linear(prog.state_vars[0], controller.A.row(0), controller.B.row(0)));
    } else {
        for (int i = 0; i < n; ++i) {
            prog.local_vars.push_back("t_" + std::to_string(i));
            plan.push_back(
                linear(prog.local_vars.back(), controller.A.row(i), controller.B.row(i)));
        }
        for (int i = 0; i < n; ++i) {
            Planned commit;
            commit.a.lhs = prog.state_vars[i];
            commit.a.terms.emplace_back(prog.local_vars[i], 1.0);
            commit.on_inputs = Eigen::RowVectorXd::Zero(q);
            plan.push_back(std::move(commit));
        }
    }

    // forward propagation; the input ball joins the chain at its first use
    std::vector<std::string> vars = prog.state_vars;
    Eigen::MatrixXd Q = Q0;
    bool inputs_absorbed = false;
    const double xi = cert.xi;
    for (auto& pl : plan) {
        const bool consumes_fresh_input = !inputs_absorbed && pl.on_inputs.size() > 0 &&
                                          pl.on_inputs.cwiseAbs().maxCoeff() > 0.0;
        StepAnnotation ann;
        ann.pre = {vars, Q};
        const int m = static_cast<int>(vars.size());
        if (consumes_fresh_input) {
            Eigen::MatrixXd Qj = Eigen::MatrixXd::Zero(m + q, m + q);
            Qj.topLeftCorner(m, m) = Q / (1.0 - xi);
            Qj.bottomRightCorner(q, q) =
                (input_bound * input_bound / xi) * Eigen::MatrixXd::Identity(q, q);
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + q + 1, m + q);
            T.topLeftCorner(m + q, m + q).setIdentity();
            for (const auto& [v, c] : pl.a.terms) {
                const int iv = index_of(vars, v);
                if (iv >= 0)
                    T(m + q, iv) = c;
                else
                    T(m + q, m + index_of(prog.input_vars, v)) = c;
            }
            Q = T * Qj * T.transpose();
            vars.insert(vars.end(), prog.input_vars.begin(), prog.input_vars.end());
            vars.push_back(pl.a.lhs);
            inputs_absorbed = true;
            ann.tactic = {ProofTactic::SProcedure, xi};
        } else {
            const int ilhs = index_of(vars, pl.a.lhs);
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m);
            for (const auto& [v, c] : pl.a.terms) {
                const int iv = index_of(vars, v);
                if (iv < 0)
                    throw InputError("autocode: internal scheduling error at " + pl.a.lhs);
                row(iv) = c;
            }
            Eigen::MatrixXd L;
            if (ilhs >= 0) {
                L = Eigen::MatrixXd::Identity(m, m);
                L.row(ilhs) = row;
            } else {
                L = Eigen::MatrixXd::Zero(m + 1, m);
                L.topLeftCorner(m, m).setIdentity();
                L.row(m) = row;
                vars.push_back(pl.a.lhs);
            }
            Q = (L * Q * L.transpose()).eval();
            ann.tactic = {ProofTactic::AffineEllipsoid, 0.0};
        }
        Q = (0.5 * (Q + Q.transpose())).eval();
        ann.post = {vars, Q};
        prog.statements.push_back(pl.a);
        prog.annotations.push_back(std::move(ann));
    }

    // the propagated final set must land inside the function postcondition
    {
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, vars.size());
        for (int i = 0; i < n; ++i) S(i, index_of(vars, prog.state_vars[i])) = 1.0;
        const Eigen::MatrixXd Qf = S * Q * S.transpose();
        const Eigen::MatrixXd W = Eigen::LLT<Eigen::MatrixXd>(Q0).matrixL().solve(
            Eigen::MatrixXd::Identity(n, n));
        const Eigen::MatrixXd G = W * Qf * W.transpose();
        const double lam = sym_eig(SymMatrix(G, 1e-7 * (1.0 + G.cwiseAbs().maxCoeff())))
                               .values(n - 1);
        if (lam > 1.0 + 1e-9)
            throw InputError("autocode: certificate does not cover the controller "
                             "(propagated set exceeds the contract, factor " +
                             std::to_string(lam) + ")");
    }
    prog.validate();
    return prog;
}

// ---------------------------------------------------------------------------
// emission
// ---------------------------------------------------------------------------
namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit_vect(std::ostream& os, const std::vector<std::string>& vars) {
    os << "vect_of_" << vars.size() << "_scalar(";
    for (size_t i = 0; i < vars.size(); ++i) os << (i ? ", " : "") << vars[i];
    os << ")";
}

void emit_pred(std::ostream& os, int qid, const std::vector<std::string>& vars) {
    os << "in_ellipsoidQ(QMat_" << qid << ", ";
    emit_vect(os, vars);
    os << ")";
}

void emit_qmat(std::ostream& os, int qid, const Eigen::MatrixXd& Q) {
    os << "QMat_" << qid << " = matrix_of_" << Q.rows() << "x" << Q.cols()
       << "_scalar(\n";
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        os << "  ";
        for (Eigen::Index j = 0; j < Q.cols(); ++j) {
            os << num(Q(i, j));
            if (i + 1 < Q.rows() || j + 1 < Q.cols()) os << ",";
            if (j + 1 < Q.cols()) os << " ";
        }
        os << "\n";
    }
    os << ");\n";
}

}  // namespace

std::string emit_source(const AnnotatedProgram& p) {
    p.validate();
    std::ostringstream os;
    std::vector<std::pair<int, const VarEllipsoid*>> qmats;
    int next_q = 0;
    auto add_q = [&](const VarEllipsoid& e) {
        qmats.emplace_back(next_q, &e);
        return next_q++;
    };

    os << "/* annotated step function, straight-line affine form */\n";
    const int q_pre = add_q(p.contract_pre);
    const int q_post = add_q(p.contract_post);
    os << "/*@\n";
    os << "    requires ";
    emit_pred(os, q_pre, p.contract_pre.vars);
    os << ";\n";
    if (!p.input_vars.empty()) {
        os << "    assumes in_ball(";
        emit_vect(os, p.input_vars);
        os << ", " << num(p.input_bound) << ");\n";
    }
    os << "    ensures ";
    emit_pred(os, q_post, p.contract_post.vars);
    os << ";\n*/\n";
    os << "void " << p.name << "(void) {\n";
    auto decl = [&](const char* role, const std::vector<std::string>& vars) {
        if (vars.empty()) return;
        os << "    /* " << role << " */\n";
        for (const auto& v : vars) os << "    double " << v << ";\n";
    };
    decl("states", p.state_vars);
    decl("inputs", p.input_vars);
    decl("outputs", p.output_vars);
    decl("locals", p.local_vars);

    for (size_t i = 0; i < p.statements.size(); ++i) {
        const auto& st = p.statements[i];
        const auto& an = p.annotations[i];
        const int qa = add_q(an.pre), qb = add_q(an.post);
        os << "    /*@\n";
        os << "        behavior step_" << i << ":\n";
        os << "        requires ";
        emit_pred(os, qa, an.pre.vars);
        os << ";\n";
        os << "        ensures ";
        emit_pred(os, qb, an.post.vars);
        os << ";\n";
        os << "        @ PROOF_TACTIC (use_strategy (";
        if (an.tactic.kind == ProofTactic::AffineEllipsoid)
            os << "AffineEllipsoid";
        else
            os << "SProcedure(" << num(an.tactic.lambda) << ")";
        os << "));\n    */\n";
        os << "    {\n        " << st.lhs << " = ";
        bool first = true;
        for (const auto& [v, c] : st.terms) {
            if (!first) os << " + ";
            os << num(c) << " * " << v;
            first = false;
        }
        if (st.constant != 0.0 || first) {
            if (!first) os << " + ";
            os << num(st.constant);
        }
        os << ";\n    }\n";
    }
    os << "}\n";
    os << "/* ellipsoid data */\n";
    for (const auto& [qid, e] : qmats) emit_qmat(os, qid, e->Q);
    return os.str();
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------
namespace {

struct Lexer {
    const std::string& text;
    size_t pos = 0;
    int line = 1, col = 1;

    explicit Lexer(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw InputError("parse error at " + std::to_string(line) + ":" +
                         std::to_string(col) + ": " + what);
    }
    bool eof() const { return pos >= text.size(); }
    char peek() const { return eof() ? '\0' : text[pos]; }
    char get() {
        const char c = text[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }
    void skip_blank() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) get();
    }
    // plain comments are whitespace; annotation comments /*@ ... are not
    void skip_ws() {
        while (!eof()) {
            const char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                get();
            } else if (c == '/' && pos + 1 < text.size() && text[pos + 1] == '*' &&
                       !(pos + 2 < text.size() && text[pos + 2] == '@')) {
                while (!eof() &&
                       !(peek() == '*' && pos + 1 < text.size() && text[pos + 1] == '/'))
                    get();
                if (eof()) fail("unterminated comment");
                get();
                get();
            } else {
                break;
            }
        }
    }
    bool try_word(const std::string& w) {
        skip_ws();
        if (text.compare(pos, w.size(), w) == 0) {
            for (size_t i = 0; i < w.size(); ++i) get();
            return true;
        }
        return false;
    }
    void expect(const std::string& w) {
        if (!try_word(w)) fail("expected \"" + w + "\"");
    }
    std::string ident() {
        skip_ws();
        if (eof() || !(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_'))
            fail("expected identifier");
        std::string out;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            out += get();
        return out;
    }
    double number() {
        skip_ws();
        const char* start = text.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        if (end == start) fail("expected number");
        for (const char* c = start; c != end; ++c) get();
        return v;
    }
    long integer() {
        skip_ws();
        const char* start = text.c_str() + pos;
        char* end = nullptr;
        const long v = std::strtol(start, &end, 10);
        if (end == start) fail("expected integer");
        for (const char* c = start; c != end; ++c) get();
        return v;
    }
};

struct PredRef {
    int qid = 0;
    std::vector<std::string> vars;
};

PredRef parse_pred(Lexer& lx) {
    lx.expect("in_ellipsoidQ");
    lx.expect("(");
    lx.expect("QMat_");
    PredRef out;
    out.qid = static_cast<int>(lx.integer());
    lx.expect(",");
    lx.expect("vect_of_");
    const long arity = lx.integer();
    lx.expect("_scalar");
    lx.expect("(");
    for (long i = 0; i < arity; ++i) {
        if (i) lx.expect(",");
        out.vars.push_back(lx.ident());
    }
    lx.expect(")");
    lx.expect(")");
    return out;
}

}  // namespace

AnnotatedProgram parse_source(const std::string& text) {
    Lexer lx(text);
    AnnotatedProgram p;
    p.input_bound = 1.0;

    struct PendingAnn {
        PredRef pre, post;
        ProofTactic tactic;
    };
    std::vector<PendingAnn> pending_anns;

    lx.expect("/*@");
    lx.expect("requires");
    const PredRef pre_ref = parse_pred(lx);
    lx.expect(";");
    if (lx.try_word("assumes")) {
        lx.expect("in_ball");
        lx.expect("(");
        lx.expect("vect_of_");
        const long arity = lx.integer();
        lx.expect("_scalar");
        lx.expect("(");
        for (long i = 0; i < arity; ++i) {
            if (i) lx.expect(",");
            lx.ident();
        }
        lx.expect(")");
        lx.expect(",");
        p.input_bound = lx.number();
        lx.expect(")");
        lx.expect(";");
    }
    lx.expect("ensures");
    const PredRef post_ref = parse_pred(lx);
    lx.expect(";");
    // ACSL validity clauses are accepted and ignored
    while (lx.try_word("requires")) {
        do {
            lx.expect("\\valid");
            lx.expect("(");
            lx.ident();
            lx.expect(")");
        } while (lx.try_word("&&"));
        lx.expect(";");
    }
    lx.expect("*/");
    lx.expect("void");
    p.name = lx.ident();
    lx.expect("(");
    lx.expect("void");
    lx.expect(")");
    lx.expect("{");

    auto parse_decls = [&](const char* role, std::vector<std::string>* into) {
        lx.skip_blank();
        const std::string marker = std::string("/* ") + role + " */";
        // the section markers carry meaning, so peek before consuming
        if (lx.text.compare(lx.pos, marker.size(), marker) != 0) return;
        for (size_t i = 0; i < marker.size(); ++i) lx.get();
        while (true) {
            lx.skip_blank();
            if (lx.text.compare(lx.pos, 6, "double") != 0) break;
            lx.expect("double");
            into->push_back(lx.ident());
            lx.expect(";");
        }
    };
    parse_decls("states", &p.state_vars);
    parse_decls("inputs", &p.input_vars);
    parse_decls("outputs", &p.output_vars);
    parse_decls("locals", &p.local_vars);

    while (true) {
        lx.skip_blank();
        if (lx.text.compare(lx.pos, 3, "/*@") != 0) break;
        lx.expect("/*@");
        PendingAnn ann;
        lx.expect("behavior");
        lx.ident();
        lx.expect(":");
        lx.expect("requires");
        ann.pre = parse_pred(lx);
        lx.expect(";");
        lx.expect("ensures");
        ann.post = parse_pred(lx);
        lx.expect(";");
        lx.expect("@");
        lx.expect("PROOF_TACTIC");
        lx.expect("(");
        lx.expect("use_strategy");
        lx.expect("(");
        const std::string tactic = lx.ident();
        if (tactic == "AffineEllipsoid") {
            ann.tactic = {ProofTactic::AffineEllipsoid, 0.0};
        } else if (tactic == "SProcedure") {
            lx.expect("(");
            const double lam = lx.number();
            lx.expect(")");
            ann.tactic = {ProofTactic::SProcedure, lam};
        } else {
            lx.fail("unknown proof tactic \"" + tactic + "\"");
        }
        lx.expect(")");
        lx.expect(")");
        lx.expect(";");
        lx.expect("*/");
        lx.expect("{");
        Assignment st;
        st.lhs = lx.ident();
        lx.expect("=");
        while (true) {
            const double c = lx.number();
            lx.skip_ws();
            if (lx.try_word("*")) {
                st.terms.emplace_back(lx.ident(), c);
            } else {
                st.constant = c;
            }
            if (!lx.try_word("+")) break;
        }
        lx.expect(";");
        lx.expect("}");
        p.statements.push_back(std::move(st));
        pending_anns.push_back(std::move(ann));
    }
    lx.expect("}");

    lx.skip_ws();
    std::map<int, Eigen::MatrixXd> table;
    while (true) {
        lx.skip_ws();
        if (lx.text.compare(lx.pos, 5, "QMat_") != 0) break;
        lx.expect("QMat_");
        const int qid = static_cast<int>(lx.integer());
        lx.expect("=");
        lx.expect("matrix_of_");
        const long rows = lx.integer();
        lx.expect("x");
        const long cols = lx.integer();
        lx.expect("_scalar");
        lx.expect("(");
        Eigen::MatrixXd Q(rows, cols);
        for (long i = 0; i < rows; ++i)
            for (long j = 0; j < cols; ++j) {
                if (i || j) lx.expect(",");
                Q(i, j) = lx.number();
            }
        lx.expect(")");
        lx.expect(";");
        if (!table.emplace(qid, std::move(Q)).second) lx.fail("duplicate QMat id");
    }
    lx.skip_ws();
    if (!lx.eof()) lx.fail("trailing input");

    auto resolve = [&](const PredRef& r) {
        const auto it = table.find(r.qid);
        if (it == table.end())
            throw InputError("parse error: QMat_" + std::to_string(r.qid) +
                             " referenced but never defined");
        if (it->second.rows() != static_cast<Eigen::Index>(r.vars.size()) ||
            it->second.rows() != it->second.cols())
            throw InputError("parse error: QMat_" + std::to_string(r.qid) +
                             " dimension does not match its variable vector");
        return VarEllipsoid{r.vars, it->second};
    };
    p.contract_pre = resolve(pre_ref);
    p.contract_post = resolve(post_ref);
    for (const auto& ann : pending_anns)
        p.annotations.push_back({resolve(ann.pre), resolve(ann.post), ann.tactic});

    p.validate();  // rejects undeclared variables in any ellipsoid vector
    return p;
}

}  // namespace gtv
