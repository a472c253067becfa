#include "socp/formulations.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace socp {

namespace {

JetVec concat(const JetVec& a, const JetVec& b) {
    JetVec r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

Mat jet_jacobian(const JetVec& out, int n) {
    Mat J = Mat::Zero(static_cast<int>(out.size()), n);
    for (size_t i = 0; i < out.size(); ++i)
        if (!out[i].constant()) J.row(static_cast<int>(i)) = out[i].g.transpose();
    return J;
}

Vec jet_values(const JetVec& v) {
    Vec r(static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) r[static_cast<int>(i)] = v[i].v;
    return r;
}

Mat block_values(const std::vector<JetVec>& b) {
    const int n = static_cast<int>(b.size());
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = b[i][j].v;
    return m;
}

}  // namespace

Jet pontryagin_h_jet(const OcpProblem& p, const JetVec& q, const JetVec& v, const JetVec& lq,
                     const JetVec& lv, const JetVec& u) {
    JetVec xv = p.sode.accel(q, v, u);
    return dot(lq, v) + dot(lv, xv) - p.cost.value(q, v, u);
}

Jet new_lagrangian_jet(const OcpProblem& p, const JetVec& q, const JetVec& k, const JetVec& vq,
                       const JetVec& vk, const JetVec& u) {
    JetVec xv = p.sode.accel(q, vq, u);
    return dot(vk, vq) + dot(k, xv) - p.cost.value(q, vq, u);
}

Jet new_hamiltonian_jet(const OcpProblem& p, const JetVec& q, const JetVec& k, const JetVec& pq,
                        const JetVec& pk, const JetVec& u) {
    JetVec xv = p.sode.accel(q, pk, u);
    return dot(pq, pk) - dot(k, xv) + p.cost.value(q, pk, u);
}

Jet forced_new_lagrangian_jet(const OcpProblem& p, const JetVec& q, const JetVec& xi,
                              const JetVec& vq, const JetVec& vxi, const JetVec& u) {
    if (!p.lagrangian)
        throw UnsupportedFormulationError("problem '" + p.name + "' has no Lagrangian system");
    JetVec d1, d2;
    lagrangian_gradient(*p.lagrangian, q, vq, d1, d2);
    JetVec fl = p.lagrangian->force(q, vq, u);
    Jet r = dot(d2, vxi);
    for (size_t i = 0; i < d1.size(); ++i) r = r + (d1[i] + fl[i]) * xi[i];
    return r - p.cost.value(q, vq, u);
}

double pontryagin_h(const OcpProblem& p, const PmpPoint& pt) {
    return pontryagin_h_jet(p, to_jets(pt.q), to_jets(pt.v), to_jets(pt.lq), to_jets(pt.lv),
                            to_jets(pt.u))
        .v;
}

double new_lagrangian(const OcpProblem& p, const NewLagPoint& pt) {
    return new_lagrangian_jet(p, to_jets(pt.q), to_jets(pt.k), to_jets(pt.vq), to_jets(pt.vk),
                              to_jets(pt.u))
        .v;
}

double new_hamiltonian(const OcpProblem& p, const NewHamPoint& pt) {
    return new_hamiltonian_jet(p, to_jets(pt.q), to_jets(pt.k), to_jets(pt.pq), to_jets(pt.pk),
                               to_jets(pt.u))
        .v;
}

double forced_new_lagrangian(const OcpProblem& p, const ForcedPoint& pt) {
    return forced_new_lagrangian_jet(p, to_jets(pt.q), to_jets(pt.xi), to_jets(pt.vq),
                                     to_jets(pt.vxi), to_jets(pt.u))
        .v;
}

double new_energy(const OcpProblem& p, const NewLagPoint& pt) {
    const int d = p.dim_q();
    const int n = 2 * d;
    JetVec q = to_jets(pt.q), k = to_jets(pt.k), u = to_jets(pt.u);
    JetVec vq = seed_block(pt.vq, n, 0, 1);
    JetVec vk = seed_block(pt.vk, n, d, 1);
    Jet lt = new_lagrangian_jet(p, q, k, vq, vk, u);
    double e = -lt.v;
    for (int i = 0; i < d; ++i) e += lt.g[i] * pt.vq[i] + lt.g[d + i] * pt.vk[i];
    return e;
}

NewHamPoint fiber_derivative_newlag(const OcpProblem& p, const NewLagPoint& pt) {
    const int d = p.dim_q();
    JetVec q = to_jets(pt.q), k = to_jets(pt.k), u = to_jets(pt.u);
    JetVec vq = seed_block(pt.vq, 2 * d, 0, 1);
    JetVec vk = seed_block(pt.vk, 2 * d, d, 1);
    Jet lt = new_lagrangian_jet(p, q, k, vq, vk, u);
    NewHamPoint out;
    out.q = pt.q;
    out.k = pt.k;
    out.u = pt.u;
    out.pq = lt.g.segment(0, d);
    out.pk = lt.g.segment(d, d);
    return out;
}

NewLagPoint fiber_derivative_newlag_inverse(const OcpProblem& p, const NewHamPoint& pt) {
    const int d = p.dim_q();
    // v_q = p_k; v_k = p_q - D2 Xv^T k + D2 C^T, affine so exact.
    JetVec q = to_jets(pt.q), u = to_jets(pt.u);
    JetVec vq = seed_block(pt.pk, d, 0, 1);
    JetVec xv = p.sode.accel(q, vq, u);
    Jet c = p.cost.value(q, vq, u);
    NewLagPoint out;
    out.q = pt.q;
    out.k = pt.k;
    out.u = pt.u;
    out.vq = pt.pk;
    out.vk = pt.pq;
    for (int i = 0; i < d; ++i) {
        double corr = 0.0;
        for (int j = 0; j < d; ++j)
            if (!xv[j].constant()) corr -= xv[j].g[i] * pt.k[j];
        if (!c.constant()) corr += c.g[i];
        out.vk[i] += corr;
    }
    return out;
}

void lagrangian_gradient(const ForceControlledLagrangian& sys, const JetVec& q, const JetVec& v,
                         JetVec& d1, JetVec& d2) {
    const int d = static_cast<int>(q.size());
    DJVec Q = seed_dual(q, 2 * d, 0);
    DJVec V = seed_dual(v, 2 * d, d);
    DJ L = sys.lagrangian.dual(Q, V);
    d1.assign(L.g.begin(), L.g.begin() + d);
    d2.assign(L.g.begin() + d, L.g.end());
}

LagrangianHessian lagrangian_hessian(const ForceControlledLagrangian& sys, const JetVec& q,
                                     const JetVec& v) {
    const int d = static_cast<int>(q.size());
    DDJVec Q = seed_ddual(q, 2 * d, 0);
    DDJVec V = seed_ddual(v, 2 * d, d);
    DDJ L = sys.lagrangian.dual2(Q, V);
    LagrangianHessian out;
    out.d1.resize(d);
    out.d2.resize(d);
    out.hqq.assign(d, JetVec(d));
    out.hqv.assign(d, JetVec(d));
    out.hvq.assign(d, JetVec(d));
    out.hvv.assign(d, JetVec(d));
    for (int i = 0; i < d; ++i) {
        out.d1[i] = L.g[i].v;
        out.d2[i] = L.g[d + i].v;
        for (int j = 0; j < d; ++j) {
            out.hqq[i][j] = L.g[i].g[j];
            out.hqv[i][j] = L.g[i].g[d + j];
            out.hvq[i][j] = L.g[d + i].g[j];
            out.hvv[i][j] = L.g[d + i].g[d + j];
        }
    }
    return out;
}

ForcedImagePoint forced_fiber_derivative(const OcpProblem& p, const ForcedPoint& pt) {
    if (!p.lagrangian)
        throw UnsupportedFormulationError("problem '" + p.name + "' has no Lagrangian system");
    const int d = p.dim_q();
    LagrangianHessian H = lagrangian_hessian(*p.lagrangian, to_jets(pt.q), to_jets(pt.vq));
    // D2 fL and D2 C at the point.
    JetVec q = to_jets(pt.q), u = to_jets(pt.u);
    JetVec vq = seed_block(pt.vq, d, 0, 1);
    JetVec fl = p.lagrangian->force(q, vq, u);
    Jet c = p.cost.value(q, vq, u);
    ForcedImagePoint out;
    out.q = pt.q;
    out.xi = pt.xi;
    out.u = pt.u;
    out.wq = Vec::Zero(d);
    out.wxi = Vec::Zero(d);
    for (int i = 0; i < d; ++i) {
        out.wxi[i] = H.d2[i].v;
        double wq = 0.0;
        for (int j = 0; j < d; ++j) {
            wq += H.hvv[i][j].v * pt.vxi[j];
            wq += H.hvq[i][j].v * pt.xi[j];
        }
        for (int j = 0; j < d; ++j)
            if (!fl[j].constant()) wq += fl[j].g[i] * pt.xi[j];
        if (!c.constant()) wq -= c.g[i];
        out.wq[i] = wq;
    }
    return out;
}

Vec legendre_velocity(const ForceControlledLagrangian& sys, const Vec& q, const Vec& pq,
                      const Vec& v_guess) {
    const int d = static_cast<int>(q.size());
    // Residual D2 L(q, v) - pq and its v-Jacobian via one dual level over
    // jet-seeded velocities.
    auto momentum = [&](const Vec& vv, Vec& res, Mat* J) {
        DJVec Q(d), V(d);
        for (int i = 0; i < d; ++i) Q[i] = DJ(Jet(q[i]));
        for (int i = 0; i < d; ++i)
            V[i] = DJ::seeded(J ? Jet::seeded(vv[i], d, i, 1) : Jet(vv[i]), d, i);
        DJ L = sys.lagrangian.dual(Q, V);
        res.resize(d);
        for (int i = 0; i < d; ++i) {
            res[i] = L.g[i].v - pq[i];
            if (J)
                for (int j = 0; j < d; ++j) (*J)(i, j) = L.g[i].g[j];
        }
    };
    Vec v = v_guess, res;
    Mat J(d, d);
    for (int it = 0; it < 50; ++it) {
        momentum(v, res, &J);
        if (res.lpNorm<Eigen::Infinity>() <= 1e-12) return v;
        Vec step = J.partialPivLu().solve(res);
        double alpha = 1.0;
        double r0 = res.norm();
        while (alpha >= 1e-8) {
            Vec vt = v - alpha * step;
            Vec rt;
            momentum(vt, rt, nullptr);
            if (rt.norm() < r0) {
                v = vt;
                break;
            }
            alpha *= 0.5;
        }
        if (alpha < 1e-8) break;
    }
    momentum(v, res, nullptr);
    if (res.lpNorm<Eigen::Infinity>() > 1e-9)
        throw EvalError("legendre_velocity: Newton did not converge");
    return v;
}

ForcedPoint forced_fiber_derivative_inverse(const OcpProblem& p, const ForcedImagePoint& pt) {
    if (!p.lagrangian)
        throw UnsupportedFormulationError("problem '" + p.name + "' has no Lagrangian system");
    const int d = p.dim_q();
    Vec vq = legendre_velocity(*p.lagrangian, pt.q, pt.wxi, Vec::Zero(d));
    LagrangianHessian H = lagrangian_hessian(*p.lagrangian, to_jets(pt.q), to_jets(vq));
    JetVec q = to_jets(pt.q), u = to_jets(pt.u);
    JetVec vqj = seed_block(vq, d, 0, 1);
    JetVec fl = p.lagrangian->force(q, vqj, u);
    Jet c = p.cost.value(q, vqj, u);
    // Solve Hvv v_xi = w_q - (Hvq + D2 fL^T) xi + D2 C^T.
    Mat hvv = block_values(H.hvv);
    Vec rhs = pt.wq;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) rhs[i] -= H.hvq[i][j].v * pt.xi[j];
        for (int j = 0; j < d; ++j)
            if (!fl[j].constant()) rhs[i] -= fl[j].g[i] * pt.xi[j];
        if (!c.constant()) rhs[i] += c.g[i];
    }
    ForcedPoint out;
    out.q = pt.q;
    out.xi = pt.xi;
    out.u = pt.u;
    out.vq = vq;
    out.vxi = hvv.partialPivLu().solve(rhs);
    return out;
}

double forced_new_hamiltonian(const OcpProblem& p, const ForcedImagePoint& pt) {
    if (!p.lagrangian)
        throw UnsupportedFormulationError("problem '" + p.name + "' has no Lagrangian system");
    const int d = p.dim_q();
    Vec vq = legendre_velocity(*p.lagrangian, pt.q, pt.wxi, Vec::Zero(d));
    JetVec q = to_jets(pt.q), v = to_jets(vq), u = to_jets(pt.u);
    JetVec d1, d2;
    lagrangian_gradient(*p.lagrangian, q, v, d1, d2);
    JetVec fl = p.lagrangian->force(q, v, u);
    double r = pt.wq.dot(vq) + p.cost.value(q, v, u).v;
    for (int i = 0; i < d; ++i) r -= (d1[i].v + fl[i].v) * pt.xi[i];
    return r;
}

ForcedHamSystem build_forced_hamiltonian(const OcpProblem& p) {
    if (!p.lagrangian)
        throw UnsupportedFormulationError("problem '" + p.name + "' has no Lagrangian system");
    const int d = p.dim_q();
    ForceControlledLagrangian sys = *p.lagrangian;
    CostFn cost = p.cost.value;

    // Point data of H(q, p): value, gradient, Hessian, plus v* and dv*.
    struct HamData {
        double value;
        Vec grad;    // 2d
        Mat hess;    // 2d x 2d
        Vec vstar;   // d
        Mat dv;      // d x 2d, derivative of v* w.r.t. (q, p)
    };
    auto ham_data = [sys, d](const Vec& q, const Vec& pq) {
        Vec v = legendre_velocity(sys, q, pq, Vec::Zero(d));
        std::vector<BlockTag> blocks{{"q", d}, {"v", d}};
        Vec x(2 * d);
        x << q, v;
        Jet2 L = jet_eval(
            [&sys, d](const JetVec& in) {
                JetVec qq(in.begin(), in.begin() + d), vv(in.begin() + d, in.end());
                return JetVec{sys.lagrangian.jet(qq, vv)};
            },
            blocks, x, 2);
        Mat hqq = L.hess_block(0, "q", "q"), hqv = L.hess_block(0, "q", "v"),
            hvq = L.hess_block(0, "v", "q"), hvv = L.hess_block(0, "v", "v");
        Mat hvv_inv = hvv.partialPivLu().inverse();
        HamData hd;
        hd.vstar = v;
        hd.value = pq.dot(v) - L.value[0];
        hd.grad = Vec(2 * d);
        hd.grad.segment(0, d) = -L.jac_block("q").transpose();
        hd.grad.segment(d, d) = v;
        hd.dv = Mat(d, 2 * d);
        hd.dv.leftCols(d) = -hvv_inv * hvq;
        hd.dv.rightCols(d) = hvv_inv;
        hd.hess = Mat(2 * d, 2 * d);
        hd.hess.topLeftCorner(d, d) = -hqq + hqv * hvv_inv * hvq;
        hd.hess.topRightCorner(d, d) = -hqv * hvv_inv;
        hd.hess.bottomLeftCorner(d, d) = -hvv_inv * hvq;
        hd.hess.bottomRightCorner(d, d) = hvv_inv;
        return hd;
    };

    auto guard_order = [](const JetVec& a) {
        for (const Jet& j : a)
            if (j.second_order())
                throw EvalError("forced Hamiltonian system: only first-order jets supported");
    };

    ForcedHamSystem out;
    out.dim_q = d;
    out.dim_u = p.dim_u();
    out.H = [ham_data, d, guard_order](const JetVec& q, const JetVec& pq) {
        guard_order(q);
        guard_order(pq);
        HamData hd = ham_data(jet_values(q), jet_values(pq));
        return chain_compose(hd.value, hd.grad, hd.hess, concat(q, pq));
    };
    auto vstar_jets = [ham_data, d](const JetVec& q, const JetVec& pq) {
        HamData hd = ham_data(jet_values(q), jet_values(pq));
        JetVec args = concat(q, pq);
        JetVec v(d);
        for (int i = 0; i < d; ++i)
            v[i] = chain_compose(hd.vstar[i], hd.dv.row(i).transpose(), Mat(), args);
        return v;
    };
    out.CH = [vstar_jets, cost, guard_order](const JetVec& q, const JetVec& pq, const JetVec& u) {
        guard_order(q);
        guard_order(pq);
        guard_order(u);
        return cost(q, vstar_jets(q, pq), u);
    };
    out.fH = [vstar_jets, sys, guard_order](const JetVec& q, const JetVec& pq, const JetVec& u) {
        guard_order(q);
        guard_order(pq);
        guard_order(u);
        return sys.force(q, vstar_jets(q, pq), u);
    };
    out.h_minus1 = [ham_data, sys, cost, d, guard_order](const JetVec& q, const JetVec& pq,
                                                         const JetVec& lq, const JetVec& lp,
                                                         const JetVec& u) {
        guard_order(q);
        guard_order(pq);
        guard_order(u);
        HamData hd = ham_data(jet_values(q), jet_values(pq));
        JetVec args = concat(q, pq);
        JetVec d2h(d), d1h(d), vst(d);
        for (int i = 0; i < d; ++i) {
            vst[i] = chain_compose(hd.vstar[i], hd.dv.row(i).transpose(), Mat(), args);
            d2h[i] = vst[i];
            d1h[i] = chain_compose(hd.grad[i], hd.hess.row(i).transpose(), Mat(), args);
        }
        JetVec fh = sys.force(q, vst, u);
        Jet r = dot(lq, d2h) - cost(q, vst, u);
        for (int i = 0; i < d; ++i) r = r + lp[i] * (fh[i] - d1h[i]);
        return r;
    };
    out.field = [ham_data, sys, d](const Vec& q, const Vec& pq, const Vec& u) {
        HamData hd = ham_data(q, pq);
        JetVec fh = sys.force(to_jets(q), to_jets(hd.vstar), to_jets(u));
        Vec r(2 * d);
        r.segment(0, d) = hd.grad.segment(d, d);
        for (int i = 0; i < d; ++i) r[d + i] = -hd.grad[i] + fh[i].v;
        return r;
    };
    return out;
}

HyperregCertificate hyperregularity_certificate(const OcpProblem& p, int n_samples,
                                                std::uint64_t seed) {
    const int d = p.dim_q();
    HyperregCertificate cert;
    cert.paper_sign = (d % 2 == 1) ? 1 : -1;  // (-1)^(d-1)
    auto pts = sample_box_points(p.box, n_samples, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> adj(-2.0, 2.0);
    bool first = true;
    long long ref = 0;
    cert.point_independent = true;
    cert.unit_modulus = true;
    for (const Vec& s : pts) {
        NewLagPoint pt;
        pt.q = s.segment(0, d);
        pt.vq = s.segment(d, d);
        pt.u = s.segment(2 * d, p.dim_u());
        pt.k = Vec::Zero(d);
        pt.vk = Vec::Zero(d);
        for (int i = 0; i < d; ++i) {
            pt.k[i] = adj(rng);
            pt.vk[i] = adj(rng);
        }
        // Blocked velocity Hessian of the new Lagrangian at the point.
        const int n = 2 * d;
        JetVec q = to_jets(pt.q), k = to_jets(pt.k), u = to_jets(pt.u);
        JetVec vq = seed_block(pt.vq, n, 0, 2);
        JetVec vk = seed_block(pt.vk, n, d, 2);
        Jet lt = new_lagrangian_jet(p, q, k, vq, vk, u);
        double det = lt.h.determinant();
        cert.dets.push_back(det);
        long long rounded = std::llround(det * 1e12);
        if (first) {
            ref = rounded;
            cert.abs_det = std::abs(det);
            cert.sign = det > 0 ? 1 : -1;
            first = false;
        } else if (rounded != ref) {
            cert.point_independent = false;
        }
        if (std::abs(std::abs(det) - 1.0) > 1e-12) cert.unit_modulus = false;
    }
    cert.sign_matches_paper = (cert.sign == cert.paper_sign);
    return cert;
}

HigherOrderEval higher_order_lagrangian(const OcpProblem& p, const Vec& q, const Vec& v,
                                        const Vec& a) {
    const int d = p.dim_q();
    const int nu = p.dim_u();
    if (nu != d)
        throw NotInvertibleError("higher-order Lagrangian requires full actuation (dim_u = dim_q)");
    JetVec qj = to_jets(q), vj = to_jets(v);
    Vec u = Vec::Zero(nu);
    Mat J;
    for (int it = 0;; ++it) {
        JetVec uj = seed_block(u, nu, 0, 1);
        JetVec xv = p.sode.accel(qj, vj, uj);
        Vec res = jet_values(xv) - a;
        J = jet_jacobian(xv, nu);
        if (res.lpNorm<Eigen::Infinity>() <= 1e-12) break;
        if (it >= 50) throw NotInvertibleError("higher-order Lagrangian: control solve diverged");
        Eigen::PartialPivLU<Mat> lu(J);
        Vec step = lu.solve(res);
        if (!step.allFinite() || std::abs(J.determinant()) < 1e-12 * std::max(1.0, J.norm()))
            throw NotInvertibleError("higher-order Lagrangian: singular control Jacobian");
        double alpha = 1.0;
        double r0 = res.norm();
        while (alpha > 1e-8) {
            Vec ut = u - alpha * step;
            Vec rt = jet_values(p.sode.accel(qj, vj, to_jets(ut))) - a;
            if (rt.norm() < r0) {
                u = ut;
                break;
            }
            alpha *= 0.5;
        }
        if (alpha <= 1e-8) throw NotInvertibleError("higher-order Lagrangian: control solve stalled");
    }
    HigherOrderEval out;
    out.u_star = u;
    JetVec uj = seed_block(u, nu, 0, 1);
    Jet c = p.cost.value(qj, vj, uj);
    out.value = c.v;
    // D3 Lh = D_u C (D_u Xv)^-1 from a = Xv(q, v, u*).
    Vec duC = c.constant() ? Vec::Zero(nu) : Vec(c.g);
    out.d3 = J.transpose().partialPivLu().solve(duC);
    return out;
}

double augmented_higher_order_lagrangian(const OcpProblem& p, const Vec& q, const Vec& v,
                                         const Vec& a, const Vec& mult) {
    const int d = p.dim_q();
    const int nu = p.dim_u();
    if (nu == d) {
        HigherOrderEval h = higher_order_lagrangian(p, q, v, a);
        return h.value;  // multiplier term vanishes: no unactuated equations
    }
    std::vector<int> act = p.actuated_indices;
    if (static_cast<int>(act.size()) != nu)
        throw UnsupportedFormulationError(
            "augmented higher-order Lagrangian requires an actuation-adapted split");
    std::vector<bool> is_act(d, false);
    for (int i : act) is_act[i] = true;
    if (static_cast<int>(mult.size()) != d - nu)
        throw std::invalid_argument("multiplier length must equal dim_q - dim_u");

    JetVec qj = to_jets(q), vj = to_jets(v);
    // Solve the actuated equations a^b = Xv^b(q, v, u) for u.
    Vec u = Vec::Zero(nu);
    for (int it = 0;; ++it) {
        JetVec uj = seed_block(u, nu, 0, 1);
        JetVec xv = p.sode.accel(qj, vj, uj);
        Vec res(nu);
        Mat J(nu, nu);
        for (int b = 0; b < nu; ++b) {
            res[b] = xv[act[b]].v - a[act[b]];
            J.row(b) = xv[act[b]].constant() ? Vec::Zero(nu).transpose()
                                             : xv[act[b]].g.transpose();
        }
        if (res.lpNorm<Eigen::Infinity>() <= 1e-12) break;
        if (it >= 50)
            throw NotInvertibleError("augmented higher-order Lagrangian: control solve diverged");
        u -= J.partialPivLu().solve(res);
    }
    JetVec uj = seed_block(u, nu, 0, 1);
    JetVec xv = p.sode.accel(qj, vj, uj);
    double val = p.cost.value(qj, vj, uj).v;
    int mi = 0;
    for (int i = 0; i < d; ++i) {
        if (is_act[i]) continue;
        if (!xv[i].constant() && xv[i].g.lpNorm<Eigen::Infinity>() > 1e-10)
            throw UnsupportedFormulationError(
                "non-actuated equation depends on the control; split unavailable");
        val += mult[mi++] * (a[i] - xv[i].v);
    }
    return val;
}

const char* to_string(RegularityClass c) {
    switch (c) {
        case RegularityClass::Singular: return "singular";
        case RegularityClass::Regular: return "regular";
        case RegularityClass::Superregular: return "superregular";
        case RegularityClass::HyperregularCandidate: return "hyperregular-candidate";
    }
    return "?";
}

RegularityClass classify_ocp_regularity(const OcpProblem& p, int n_samples, std::uint64_t seed) {
    const int d = p.dim_q();
    const int nu = p.dim_u();
    auto pts = sample_box_points(p.box, n_samples, seed);
    std::mt19937_64 rng(seed ^ 0x7f4a7c15ULL);
    auto draw_adj = [&](int i) {
        if (p.box.adj_lo.size()) {
            int k = i % static_cast<int>(p.box.adj_lo.size());
            std::uniform_real_distribution<double> dist(p.box.adj_lo[k], p.box.adj_hi[k]);
            return dist(rng);
        }
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        return dist(rng);
    };

    auto rank_of = [&](const Mat& m) {
        Eigen::JacobiSVD<Mat> svd(m);
        const auto& sv = svd.singularValues();
        double smax = sv.size() ? sv(0) : 0.0;
        int r = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) > 1e-10 * std::max(smax, 1.0)) ++r;
        return r;
    };

    bool all_full = true, all_cost_full = true;
    bool all_deficient = true, gradient_u_free = true;
    for (const Vec& s : pts) {
        Vec q = s.segment(0, d), v = s.segment(d, d);
        Vec lq(d), lv(d);
        for (int i = 0; i < d; ++i) {
            lq[i] = draw_adj(i);
            lv[i] = draw_adj(d + i);
        }
        // A few control values per point to probe u-dependence of D_u H.
        for (int uk = 0; uk < 3; ++uk) {
            Vec u = s.segment(2 * d, nu);
            if (uk > 0)
                for (int i = 0; i < nu; ++i) u[i] += 0.37 * uk;
            JetVec uj = seed_block(u, nu, 0, 2);
            Jet h = pontryagin_h_jet(p, to_jets(q), to_jets(v), to_jets(lq), to_jets(lv), uj);
            Jet c = p.cost.value(to_jets(q), to_jets(v), uj);
            Mat hu = h.second_order() ? Mat(h.h) : Mat::Zero(nu, nu);
            Mat cu = c.second_order() ? Mat(c.h) : Mat::Zero(nu, nu);
            int rh = rank_of(hu);
            if (rh < nu) all_full = false;
            if (rh > 0) all_deficient = false;
            if (hu.lpNorm<Eigen::Infinity>() > 1e-10) gradient_u_free = false;
            if (rank_of(cu) < nu) all_cost_full = false;
        }
    }
    if (all_deficient && gradient_u_free) return RegularityClass::Singular;
    if (!all_full) return RegularityClass::Singular;
    if (!all_cost_full) return RegularityClass::Regular;
    if (p.hyperregular_assertion) return RegularityClass::HyperregularCandidate;
    return RegularityClass::Superregular;
}

EliminatedScalar eliminate_control(const FlatFn& f, int nx, int nu, const Vec& x, const Vec& u) {
    Vec z(nx + nu);
    z << x, u;
    std::vector<BlockTag> blocks{{"x", nx}, {"u", nu}};
    Jet2 d = jet_eval(f, blocks, z, 2);
    if (d.value.size() != 1) throw std::invalid_argument("eliminate_control expects a scalar");
    Mat huu = d.hess_block(0, "u", "u");
    Mat hux = d.hess_block(0, "u", "x");
    Mat hxx = d.hess_block(0, "x", "x");
    EliminatedScalar out;
    out.value = d.value[0];
    out.grad = d.jac_block("x").row(0).transpose();
    Eigen::PartialPivLU<Mat> lu(huu);
    out.du_dx = -lu.solve(hux);
    out.hess = hxx + d.hess_block(0, "x", "u") * out.du_dx;
    // Symmetrize to scrub the last-bit asymmetry of the two composition routes.
    out.hess = 0.5 * (out.hess + out.hess.transpose());
    return out;
}

}  // namespace socp
