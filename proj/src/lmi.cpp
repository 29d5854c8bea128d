#include "gtv/lmi.hpp"

#include <algorithm>
#include <cmath>

#include "gtv/json_io.hpp"
#include "gtv/model.hpp"
#include "json.hpp"

namespace gtv {

std::string to_string(LmiKind k) {
    switch (k) {
        case LmiKind::Invariance: return "invariance";
        case LmiKind::BoundedReal: return "brl";
        case LmiKind::CommonLyapunov: return "common";
    }
    return "?";
}

LmiKind lmi_kind_from_string(const std::string& s) {
    if (s == "invariance") return LmiKind::Invariance;
    if (s == "brl") return LmiKind::BoundedReal;
    if (s == "common") return LmiKind::CommonLyapunov;
    throw InputError("unknown LMI kind \"" + s + "\" (expected invariance|brl|common)");
}

int LmiProblem::block_dim(size_t v) const {
    switch (kind) {
        case LmiKind::CommonLyapunov: return n;
        case LmiKind::Invariance: return n + static_cast<int>(vertices[v].B.cols());
        case LmiKind::BoundedReal: return n + static_cast<int>(vertices[v].B.cols());
    }
    return n;
}

Eigen::MatrixXd LmiProblem::block(size_t v, const Eigen::MatrixXd& P) const {
    const auto& vx = vertices.at(v);
    const Eigen::MatrixXd& A = vx.A;
    switch (kind) {
        case LmiKind::CommonLyapunov:
            return A.transpose() * P * A - P;
        case LmiKind::Invariance: {
            const Eigen::MatrixXd& B = vx.B;
            const int q = static_cast<int>(B.cols());
            Eigen::MatrixXd M(n + q, n + q);
            M.topLeftCorner(n, n) = A.transpose() * P * A - P + xi * P;
            M.topRightCorner(n, q) = A.transpose() * P * B;
            M.bottomLeftCorner(q, n) = M.topRightCorner(n, q).transpose();
            M.bottomRightCorner(q, q) =
                B.transpose() * P * B - xi * Eigen::MatrixXd::Identity(q, q);
            return M;
        }
        case LmiKind::BoundedReal: {
            const Eigen::MatrixXd &B = vx.B, &C = vx.C, &D = vx.D;
            const int m = static_cast<int>(B.cols());
            Eigen::MatrixXd M(n + m, n + m);
            M.topLeftCorner(n, n) = A.transpose() * P * A - P + C.transpose() * C;
            M.bottomLeftCorner(m, n) = B.transpose() * P * A + D.transpose() * C;
            M.topRightCorner(n, m) = M.bottomLeftCorner(m, n).transpose();
            M.bottomRightCorner(m, m) =
                B.transpose() * P * B + D.transpose() * D -
                gammas.at(v) * Eigen::MatrixXd::Identity(m, m);
            return M;
        }
    }
    throw InputError("LmiProblem: bad kind");
}

LmiProblem build_invariance_lmi(
    const std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>>& ab, double xi) {
    if (ab.empty()) throw InputError("build_invariance_lmi: no vertices");
    if (!(xi > 0.0 && xi < 1.0)) throw InputError("build_invariance_lmi: xi must be in (0, 1)");
    LmiProblem p;
    p.kind = LmiKind::Invariance;
    p.xi = xi;
    p.n = static_cast<int>(ab[0].first.rows());
    for (const auto& [A, B] : ab) {
        if (A.rows() != p.n || A.cols() != p.n || B.rows() != p.n ||
            B.cols() != ab[0].second.cols())
            throw InputError("build_invariance_lmi: inconsistent vertex dimensions");
        p.vertices.push_back({A, B, {}, {}});
    }
    return p;
}

LmiProblem build_bounded_real_lmi(const std::vector<LmiVertex>& vertices,
                                  const std::vector<double>& gammas) {
    if (vertices.empty()) throw InputError("build_bounded_real_lmi: no vertices");
    if (gammas.size() != vertices.size())
        throw InputError("build_bounded_real_lmi: need one gamma per vertex");
    for (double g : gammas)
        if (!(g > 0)) throw InputError("build_bounded_real_lmi: gammas must be > 0");
    LmiProblem p;
    p.kind = LmiKind::BoundedReal;
    p.gammas = gammas;
    p.n = static_cast<int>(vertices[0].A.rows());
    for (const auto& v : vertices) {
        if (v.A.rows() != p.n || v.A.cols() != p.n || v.B.rows() != p.n ||
            v.C.cols() != p.n || v.D.rows() != v.C.rows() || v.D.cols() != v.B.cols())
            throw InputError("build_bounded_real_lmi: inconsistent vertex dimensions");
        p.vertices.push_back(v);
    }
    return p;
}

LmiProblem build_common_lyapunov_lmi(const std::vector<Eigen::MatrixXd>& vertices) {
    if (vertices.empty()) throw InputError("build_common_lyapunov_lmi: no vertices");
    LmiProblem p;
    p.kind = LmiKind::CommonLyapunov;
    p.n = static_cast<int>(vertices[0].rows());
    for (const auto& A : vertices) {
        if (A.rows() != p.n || A.cols() != p.n)
            throw InputError("build_common_lyapunov_lmi: vertices must be square, equal n");
        p.vertices.push_back({A, {}, {}, {}});
    }
    return p;
}

// ---------------------------------------------------------------------------
// solver internals
// ---------------------------------------------------------------------------
namespace {

// Diagonal power-of-two balancing over all vertex matrices (Osborne-style).
// A~ = D A D^-1, B~ = D B, C~ = C D^-1 with D = diag(d); the congruence
// P = D P~ D maps certificates back exactly (powers of two are lossless).
Eigen::VectorXd balance_scales(const LmiProblem& p) {
    const int n = p.n;
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            // row/col norms of index i in the currently balanced data
            double row = 0, col = 0;
            for (const auto& v : p.vertices) {
                for (int j = 0; j < n; ++j) {
                    if (j != i) {
                        row += std::abs(v.A(i, j)) * d(i) / d(j);
                        col += std::abs(v.A(j, i)) * d(j) / d(i);
                    }
                }
                if (v.B.size() > 0) row += v.B.row(i).cwiseAbs().sum() * d(i);
                if (v.C.size() > 0) col += v.C.col(i).cwiseAbs().sum() / d(i);
            }
            if (row > 0 && col > 0) {
                const double f =
                    std::clamp(std::exp2(std::round(0.5 * std::log2(col / row))), 0.5, 2.0);
                if (f != 1.0) {
                    d(i) *= f;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    return d;
}

LmiProblem balanced_problem(const LmiProblem& p, const Eigen::VectorXd& d) {
    LmiProblem b = p;
    const Eigen::VectorXd di = d.cwiseInverse();
    for (auto& v : b.vertices) {
        v.A = d.asDiagonal() * v.A * di.asDiagonal();
        if (v.B.size() > 0) v.B = d.asDiagonal() * v.B;
        if (v.C.size() > 0) v.C = v.C * di.asDiagonal();
    }
    return b;
}

struct SymBasis {
    int n = 0;
    std::vector<std::pair<int, int>> idx;  // (i, j), i <= j

    explicit SymBasis(int n_) : n(n_) {
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) idx.emplace_back(i, j);
    }
    int size() const { return static_cast<int>(idx.size()); }
    Eigen::MatrixXd unpack(const Eigen::VectorXd& x) const {
        Eigen::MatrixXd P(n, n);
        for (int a = 0; a < size(); ++a) {
            const auto [i, j] = idx[a];
            P(i, j) = P(j, i) = x(a);
        }
        return P;
    }
    Eigen::VectorXd pack(const Eigen::MatrixXd& P) const {
        Eigen::VectorXd x(size());
        for (int a = 0; a < size(); ++a) x(a) = P(idx[a].first, idx[a].second);
        return x;
    }
};

// One barrier constraint S(x) = S0 + sum_a x_a G_a + t * Gt, S > 0 required.
struct BarrierBlock {
    Eigen::MatrixXd S0;
    std::vector<Eigen::MatrixXd> G;  // per P-coordinate
    double t_coeff = 0.0;            // coefficient of t on the identity
    int dim = 0;

    Eigen::MatrixXd at(const Eigen::VectorXd& x, double t) const {
        Eigen::MatrixXd S = S0;
        for (size_t a = 0; a < G.size(); ++a)
            if (x(a) != 0.0) S += x(a) * G[a];
        if (t_coeff != 0.0) S += t_coeff * t * Eigen::MatrixXd::Identity(dim, dim);
        return S;
    }
};

// dF/dP applied to a symmetric basis element, per kind (see LmiProblem::block)
Eigen::MatrixXd block_derivative(const LmiProblem& p, size_t v, const Eigen::MatrixXd& E) {
    const auto& vx = p.vertices[v];
    const int n = p.n;
    switch (p.kind) {
        case LmiKind::CommonLyapunov:
            return vx.A.transpose() * E * vx.A - E;
        case LmiKind::Invariance: {
            const int q = static_cast<int>(vx.B.cols());
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + q, n + q);
            M.topLeftCorner(n, n) = vx.A.transpose() * E * vx.A - E + p.xi * E;
            M.topRightCorner(n, q) = vx.A.transpose() * E * vx.B;
            M.bottomLeftCorner(q, n) = M.topRightCorner(n, q).transpose();
            M.bottomRightCorner(q, q) = vx.B.transpose() * E * vx.B;
            return M;
        }
        case LmiKind::BoundedReal: {
            const int m = static_cast<int>(vx.B.cols());
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
            M.topLeftCorner(n, n) = vx.A.transpose() * E * vx.A - E;
            M.bottomLeftCorner(m, n) = vx.B.transpose() * E * vx.A;
            M.topRightCorner(n, m) = M.bottomLeftCorner(m, n).transpose();
            M.bottomRightCorner(m, m) = vx.B.transpose() * E * vx.B;
            return M;
        }
    }
    throw InputError("block_derivative: bad kind");
}

double max_eig(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double min_eig(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

struct BarrierSetup {
    std::vector<BarrierBlock> blocks;
    double nu = 0;  // total barrier parameter (sum of block dims)
};

BarrierSetup make_barrier(const LmiProblem& p, const SymBasis& basis, double eps,
                          double top) {
    BarrierSetup s;
    const int n = p.n;
    const Eigen::MatrixXd Zero = Eigen::MatrixXd::Zero(n, n);
    for (size_t v = 0; v < p.vertices.size(); ++v) {
        BarrierBlock b;
        b.dim = p.block_dim(v);
        b.t_coeff = 1.0;  // S = tI - F(P)
        b.S0 = -p.block(v, Zero);
        for (int a = 0; a < basis.size(); ++a) {
            const auto [i, j] = basis.idx[a];
            Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
            E(i, j) = E(j, i) = 1.0;
            b.G.push_back(-block_derivative(p, v, E));
        }
        s.nu += b.dim;
        s.blocks.push_back(std::move(b));
    }
    // P - eps I > 0
    {
        BarrierBlock b;
        b.dim = n;
        b.S0 = -eps * Eigen::MatrixXd::Identity(n, n);
        for (int a = 0; a < basis.size(); ++a) {
            const auto [i, j] = basis.idx[a];
            Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
            E(i, j) = E(j, i) = 1.0;
            b.G.push_back(E);
        }
        s.nu += n;
        s.blocks.push_back(std::move(b));
    }
    // top I - P > 0
    {
        BarrierBlock b;
        b.dim = n;
        b.S0 = top * Eigen::MatrixXd::Identity(n, n);
        for (int a = 0; a < basis.size(); ++a) {
            const auto [i, j] = basis.idx[a];
            Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
            E(i, j) = E(j, i) = 1.0;
            b.G.push_back(-E);
        }
        s.nu += n;
        s.blocks.push_back(std::move(b));
    }
    return s;
}

bool all_positive(const BarrierSetup& s, const Eigen::VectorXd& x, double t) {
    if (!x.allFinite() || !std::isfinite(t)) return false;
    for (const auto& b : s.blocks) {
        const Eigen::MatrixXd S = b.at(x, t);
        if (!S.allFinite()) return false;
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) return false;
    }
    return true;
}

}  // namespace

SolveResult solve(const LmiProblem& p, const Tolerances& tol) {
    if (p.vertices.empty()) throw InputError("solve: empty problem");
    SolveResult res;

    // provable necessary condition: every vertex A must be Schur
    for (size_t v = 0; v < p.vertices.size(); ++v) {
        const double rho = spectral_radius(p.vertices[v].A);
        const bool strict = p.kind != LmiKind::BoundedReal;
        if (rho >= 1.0 + (strict ? 0.0 : 1e-12)) {
            res.status = SolveStatus::Infeasible;
            res.detail = "vertex " + std::to_string(v) + " has spectral radius " +
                         std::to_string(rho) + " >= 1; no P can satisfy the inequality";
            res.best_margin = rho - 1.0;
            return res;
        }
    }

    const Eigen::VectorXd d = balance_scales(p);
    const LmiProblem bp = balanced_problem(p, d);
    const SymBasis basis(p.n);
    const int nv = basis.size();

    // problem scale: typical block magnitude at P = I
    double scale = 0.0;
    for (size_t v = 0; v < bp.vertices.size(); ++v)
        scale = std::max(scale,
                         bp.block(v, Eigen::MatrixXd::Identity(p.n, p.n)).cwiseAbs().maxCoeff());
    scale = std::max(scale, 1e-30);

    double top = 1.0, eps = 1e-10;
    if (p.kind == LmiKind::BoundedReal) {
        double ref = 1.0;
        for (const auto& v : bp.vertices) {
            if (v.C.size() > 0) ref = std::max(ref, (v.C.transpose() * v.C).cwiseAbs().maxCoeff());
        }
        for (double g : p.gammas) ref = std::max(ref, g);
        top = 1e6 * ref;
        eps = 1e-12 * ref;
    } else if (p.kind == LmiKind::Invariance) {
        top = 1e5;
        eps = 1e-14;
    }

    const auto setup = make_barrier(bp, basis, eps, top);

    Eigen::VectorXd x =
        basis.pack(std::min(1.0, 0.5 * top) * Eigen::MatrixXd::Identity(p.n, p.n));
    double t = 0.0;
    {
        double worst = -std::numeric_limits<double>::infinity();
        const Eigen::MatrixXd P0 = basis.unpack(x);
        for (size_t v = 0; v < bp.vertices.size(); ++v)
            worst = std::max(worst, max_eig(bp.block(v, P0)));
        t = worst + 0.1 * scale + 1e-6;
    }
    if (!all_positive(setup, x, t))
        throw NumericError("solve: could not construct a strictly feasible start");

    const int cap = tol.lmi_max_iterations;
    int newton_steps = 0;
    double mu = setup.nu / std::max(std::abs(t), 1e-3 * scale);
    bool proven_infeasible = false;
    int infeasible_confirmations = 0;
    double lower_bound = -std::numeric_limits<double>::infinity();

    auto eval_true_margin = [&](const Eigen::VectorXd& xv) {
        const Eigen::MatrixXd P = basis.unpack(xv);
        double worst = -std::numeric_limits<double>::infinity();
        for (size_t v = 0; v < bp.vertices.size(); ++v)
            worst = std::max(worst, max_eig(bp.block(v, P)));
        return worst;
    };

    Eigen::VectorXd best_x = x;
    double best_margin = eval_true_margin(x);

    while (newton_steps < cap) {
        // center at current mu
        bool centered = false;
        for (int it = 0; it < 80 && newton_steps < cap; ++it, ++newton_steps) {
            // gradient and Hessian over (x, t)
            Eigen::VectorXd g = Eigen::VectorXd::Zero(nv + 1);
            Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nv + 1, nv + 1);
            g(nv) = mu;
            for (const auto& b : setup.blocks) {
                const Eigen::MatrixXd S = b.at(x, t);
                Eigen::LLT<Eigen::MatrixXd> llt(S);
                if (llt.info() != Eigen::Success)
                    throw NumericError("solve: barrier left the cone (internal)");
                const Eigen::MatrixXd Sinv =
                    llt.solve(Eigen::MatrixXd::Identity(b.dim, b.dim));
                std::vector<Eigen::MatrixXd> T(b.G.size());
                for (size_t a = 0; a < b.G.size(); ++a) {
                    T[a] = Sinv * b.G[a];
                    g(a) -= T[a].trace();
                }
                Eigen::MatrixXd Tt;
                if (b.t_coeff != 0.0) {
                    Tt = b.t_coeff * Sinv;
                    g(nv) -= Tt.trace();
                }
                for (size_t a = 0; a < b.G.size(); ++a) {
                    for (size_t c = a; c < b.G.size(); ++c) {
                        const double h = (T[a].array() * T[c].transpose().array()).sum();
                        H(a, c) += h;
                        if (c != a) H(c, a) += h;
                    }
                    if (b.t_coeff != 0.0) {
                        const double h = (T[a].array() * Tt.transpose().array()).sum();
                        H(a, nv) += h;
                        H(nv, a) += h;
                    }
                }
                if (b.t_coeff != 0.0) H(nv, nv) += (Tt.array() * Tt.transpose().array()).sum();
            }

            Eigen::LDLT<Eigen::MatrixXd> hl(H);
            Eigen::VectorXd step = -hl.solve(g);
            double decrement2 = -step.dot(g);
            if (!step.allFinite() || !(decrement2 > 0)) {  // regularize
                H.diagonal().array() += 1e-10 * (H.diagonal().maxCoeff() + 1.0);
                step = -Eigen::LDLT<Eigen::MatrixXd>(H).solve(g);
                decrement2 = -step.dot(g);
                if (!step.allFinite() || !(decrement2 > 0)) break;
            }

            // damped Newton keeps self-concordant iterates in the domain
            double alpha = std::min(1.0, 1.0 / (1.0 + std::sqrt(decrement2)));
            Eigen::VectorXd xs = x + alpha * step.head(nv);
            double ts = t + alpha * step(nv);
            while (alpha > 1e-13 && !all_positive(setup, xs, ts)) {
                alpha *= 0.5;
                xs = x + alpha * step.head(nv);
                ts = t + alpha * step(nv);
            }
            if (alpha <= 1e-13) break;  // cone edge; not centered
            x = xs;
            t = ts;
            if (decrement2 < 1e-9) {
                centered = true;
                break;
            }
        }

        const double margin_now = eval_true_margin(x);
        if (margin_now < best_margin) {
            best_margin = margin_now;
            best_x = x;
        }
        const double gap = setup.nu / mu;
        if (centered) lower_bound = t - gap;

        const double gate = tol.lmi_margin_rel * scale;
        if (best_margin <= -gate && gap < 0.25 * std::abs(best_margin)) break;
        // certified infeasibility: successive centered points resolve t* > 0
        if (centered && t > 0 && gap < 0.5 * t && lower_bound > 1e-9 * scale) {
            if (++infeasible_confirmations >= 2) {
                proven_infeasible = true;
                break;
            }
        }
        if (mu > 1e19) break;
        mu *= 8.0;
    }

    res.iterations = newton_steps;
    res.best_margin = best_margin;

    // map back to original coordinates and re-evaluate margins there
    Eigen::MatrixXd P = d.asDiagonal() * basis.unpack(best_x) * d.asDiagonal();
    P = 0.5 * (P + P.transpose());
    bool normalized = false;
    if (p.kind == LmiKind::CommonLyapunov) {
        const double lmax = max_eig(P);
        if (lmax > 0) P /= lmax;
        normalized = true;
    }

    std::vector<double> margins;
    double worst = -std::numeric_limits<double>::infinity();
    for (size_t v = 0; v < p.vertices.size(); ++v) {
        margins.push_back(max_eig(p.block(v, P)));
        worst = std::max(worst, margins.back());
    }
    const double lam_min_p = min_eig(P);
    const double lam_max_p = max_eig(P);

    // feasible means strictly negative in the original coordinates AND at the
    // solver's working tolerance in the balanced ones; the relative gate lives
    // in balanced coordinates because congruence skews margin magnitudes
    const bool balanced_ok = best_margin <= -tol.lmi_margin_rel * scale;
    if (worst < 0 && balanced_ok && lam_min_p >= tol.lmi_pd_floor * lam_max_p) {
        LyapunovCertificate cert{p.kind,
                                 SymMatrix(P, 1e-9 * (1.0 + P.cwiseAbs().maxCoeff())),
                                 margins, newton_steps, worst, normalized, p.xi};
        res.status = SolveStatus::Feasible;
        res.certificate = std::move(cert);
        res.best_margin = worst;
        return res;
    }
    if (proven_infeasible) {
        res.status = SolveStatus::Infeasible;
        res.detail = "optimum margin is positive (lower bound " +
                     std::to_string(lower_bound) + " in balanced coordinates)";
        return res;
    }
    res.status = SolveStatus::Undecided;
    res.detail = "no certificate within " + std::to_string(newton_steps) +
                 " iterations (best margin " + std::to_string(best_margin) + ")";
    return res;
}

CertificateCheck check_certificate(const LmiProblem& p, const SymMatrix& P,
                                   const Tolerances& tol) {
    if (P.n() != p.n) throw InputError("check_certificate: P dimension mismatch");
    CertificateCheck out;
    out.p_min_eigenvalue = min_eig(P.mat());
    bool all_pass = out.p_min_eigenvalue > 0;
    for (size_t v = 0; v < p.vertices.size(); ++v) {
        const Eigen::MatrixXd M = p.block(v, P.mat());
        VertexMargin vm;
        vm.vertex = v;
        vm.lam_max = max_eig(M);
        if (p.kind == LmiKind::BoundedReal) {
            const double t = tol.brl_semidef * std::max(1.0, M.cwiseAbs().maxCoeff());
            vm.pass = vm.lam_max <= t;
            const auto& vx = p.vertices[v];
            const Eigen::MatrixXd W =
                p.gammas[v] * Eigen::MatrixXd::Identity(vx.B.cols(), vx.B.cols()) -
                vx.D.transpose() * vx.D - vx.B.transpose() * P.mat() * vx.B;
            if (min_eig(W) <= 0) {
                out.well_posed = false;
                vm.pass = false;
            }
        } else {
            vm.pass = vm.lam_max < 0;
        }
        all_pass = all_pass && vm.pass;
        out.margins.push_back(vm);
    }
    out.pass = all_pass;
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

LmiProblem parse_lmi_problem(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("LMI problem parse: ") + e.what());
    }
    if (!j.contains("kind") || !j.contains("vertices"))
        throw InputError("LMI problem parse: expected keys kind and vertices");
    const LmiKind kind = lmi_kind_from_string(j["kind"].get<std::string>());
    const auto& jv = j["vertices"];
    if (!jv.is_array() || jv.empty()) throw InputError("LMI problem parse: vertices");
    switch (kind) {
        case LmiKind::CommonLyapunov: {
            std::vector<Eigen::MatrixXd> as;
            for (const auto& v : jv) as.push_back(json_to_matrix(v.contains("A") ? v["A"] : v));
            return build_common_lyapunov_lmi(as);
        }
        case LmiKind::Invariance: {
            if (!j.contains("xi")) throw InputError("LMI problem parse: invariance needs xi");
            std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> ab;
            for (const auto& v : jv)
                ab.emplace_back(json_to_matrix(v.at("A")), json_to_matrix(v.at("B")));
            return build_invariance_lmi(ab, j["xi"].get<double>());
        }
        case LmiKind::BoundedReal: {
            if (!j.contains("gammas")) throw InputError("LMI problem parse: brl needs gammas");
            std::vector<LmiVertex> vs;
            for (const auto& v : jv)
                vs.push_back({json_to_matrix(v.at("A")), json_to_matrix(v.at("B")),
                              json_to_matrix(v.at("C")), json_to_matrix(v.at("D"))});
            return build_bounded_real_lmi(vs, j["gammas"].get<std::vector<double>>());
        }
    }
    throw InputError("LMI problem parse: bad kind");
}

std::string serialize_lmi_problem(const LmiProblem& p) {
    nlohmann::json j;
    j["kind"] = to_string(p.kind);
    j["vertices"] = nlohmann::json::array();
    for (const auto& v : p.vertices) {
        nlohmann::json jv;
        jv["A"] = matrix_to_json(v.A);
        if (v.B.size() > 0) jv["B"] = matrix_to_json(v.B);
        if (v.C.size() > 0) jv["C"] = matrix_to_json(v.C);
        if (v.D.size() > 0) jv["D"] = matrix_to_json(v.D);
        j["vertices"].push_back(std::move(jv));
    }
    if (p.kind == LmiKind::Invariance) j["xi"] = p.xi;
    if (p.kind == LmiKind::BoundedReal) j["gammas"] = p.gammas;
    return j.dump(1);
}

LyapunovCertificate parse_certificate(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("certificate parse: ") + e.what());
    }
    for (const char* k : {"kind", "P"})
        if (!j.contains(k)) throw InputError("certificate parse: missing key");
    const Eigen::MatrixXd pm = json_to_matrix(j["P"]);
    LyapunovCertificate c{lmi_kind_from_string(j["kind"].get<std::string>()),
                          SymMatrix(pm, 1e-9 * (1.0 + pm.cwiseAbs().maxCoeff())),
                          {}, 0, 0.0, false, 0.0};
    if (j.contains("margins")) c.margins = j["margins"].get<std::vector<double>>();
    c.iterations = j.value("iterations", 0);
    c.final_margin = j.value("final_margin", 0.0);
    c.normalized = j.value("normalized", false);
    if (j.contains("xi")) c.xi = j["xi"].get<double>();
    return c;
}

std::string serialize_certificate(const LyapunovCertificate& c) {
    nlohmann::json j;
    j["kind"] = to_string(c.kind);
    j["P"] = {{"n", c.P.n()}, {"rows", matrix_to_json(c.P.mat())}};
    j["margins"] = c.margins;
    j["iterations"] = c.iterations;
    j["final_margin"] = c.final_margin;
    j["normalized"] = c.normalized;
    if (c.xi != 0.0) j["xi"] = c.xi;
    return j.dump(1);
}

}  // namespace gtv
