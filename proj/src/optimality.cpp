#include "socp/optimality.hpp"

#include <Eigen/Eigenvalues>

namespace socp {

const char* to_string(Formulation f) {
    switch (f) {
        case Formulation::Pmp: return "pmp";
        case Formulation::NewLag: return "newlag";
        case Formulation::NewHam: return "newham";
        case Formulation::Forced: return "forced";
    }
    return "?";
}

Formulation formulation_from_string(const std::string& s) {
    if (s == "pmp") return Formulation::Pmp;
    if (s == "newlag") return Formulation::NewLag;
    if (s == "newham") return Formulation::NewHam;
    if (s == "forced") return Formulation::Forced;
    throw std::invalid_argument("unknown formulation: " + s);
}

Chart chart_of(Formulation f) {
    switch (f) {
        case Formulation::Pmp: return Chart::PmpE;
        case Formulation::NewLag: return Chart::NewLagE;
        case Formulation::NewHam: return Chart::NewHamE;
        case Formulation::Forced: return Chart::TangentE;
    }
    return Chart::PmpE;
}

namespace {

JetVec slice(const JetVec& x, int from, int len) {
    return JetVec(x.begin() + from, x.begin() + from + len);
}

}  // namespace

Jet formulation_scalar(const OcpProblem& p, Formulation f, const JetVec& coords, const JetVec& u) {
    const int d = p.dim_q();
    JetVec b0 = slice(coords, 0, d), b1 = slice(coords, d, d), b2 = slice(coords, 2 * d, d),
           b3 = slice(coords, 3 * d, d);
    switch (f) {
        case Formulation::Pmp: return pontryagin_h_jet(p, b0, b1, b2, b3, u);
        case Formulation::NewLag: return new_lagrangian_jet(p, b0, b1, b2, b3, u);
        case Formulation::NewHam: return new_hamiltonian_jet(p, b0, b1, b2, b3, u);
        case Formulation::Forced: return forced_new_lagrangian_jet(p, b0, b1, b2, b3, u);
    }
    throw std::logic_error("unreachable");
}

namespace {

// Maximized charts want a negative definite u-Hessian at the accepted root,
// the Hamiltonian chart a positive definite one.
bool right_definite(Formulation f, const Mat& huu) {
    Eigen::SelfAdjointEigenSolver<Mat> es(huu);
    double scale = std::max(1.0, huu.lpNorm<Eigen::Infinity>());
    if (f == Formulation::NewHam) return es.eigenvalues().minCoeff() > 1e-10 * scale;
    return es.eigenvalues().maxCoeff() < -1e-10 * scale;
}

struct NewtonOutcome {
    Vec u;
    bool converged = false;
    bool singular_jacobian = false;
    double residual = 0.0;
};

NewtonOutcome newton_on_gradient(const OcpProblem& p, Formulation f, const Vec& coords,
                                 const Vec& u0) {
    const int nu = p.dim_u();
    JetVec cj = to_jets(coords);
    auto grad_hess = [&](const Vec& u, Vec& g, Mat* H) {
        JetVec uj = seed_block(u, nu, 0, H ? 2 : 1);
        Jet s = formulation_scalar(p, f, cj, uj);
        g = s.constant() ? Vec::Zero(nu) : Vec(s.g);
        if (H) *H = s.second_order() ? Mat(s.h) : Mat::Zero(nu, nu);
    };
    NewtonOutcome out;
    out.u = u0;
    Vec g;
    Mat H;
    for (int it = 0; it < 50; ++it) {
        grad_hess(out.u, g, &H);
        out.residual = g.lpNorm<Eigen::Infinity>();
        if (out.residual <= 1e-12) {
            out.converged = true;
            return out;
        }
        Eigen::FullPivLU<Mat> lu(H);
        if (!lu.isInvertible()) {
            out.singular_jacobian = true;
            return out;
        }
        Vec step = lu.solve(g);
        double alpha = 1.0;
        double r0 = g.norm();
        bool moved = false;
        while (alpha >= 1e-10) {
            Vec ut = out.u - alpha * step;
            Vec gt;
            grad_hess(ut, gt, nullptr);
            if (gt.norm() < r0) {
                out.u = ut;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) return out;
    }
    grad_hess(out.u, g, nullptr);
    out.residual = g.lpNorm<Eigen::Infinity>();
    out.converged = out.residual <= 1e-12;
    return out;
}

Mat u_hessian(const OcpProblem& p, Formulation f, const Vec& coords, const Vec& u) {
    const int nu = p.dim_u();
    JetVec uj = seed_block(u, nu, 0, 2);
    Jet s = formulation_scalar(p, f, to_jets(coords), uj);
    return s.second_order() ? Mat(s.h) : Mat::Zero(nu, nu);
}

}  // namespace

ControlSolve solve_max_condition(const OcpProblem& p, Formulation f, const Vec& coords,
                                 const Vec& u0, bool multi_start) {
    const int nu = p.dim_u();
    std::vector<Vec> starts{u0};
    if (multi_start) {
        starts.push_back(u0 + Vec::Constant(nu, 0.7));
        starts.push_back(u0 - Vec::Constant(nu, 0.7));
    }
    std::vector<Vec> roots;
    bool any_singular_jac = false;
    for (const Vec& s : starts) {
        NewtonOutcome o = newton_on_gradient(p, f, coords, s);
        if (o.converged) {
            bool dup = false;
            for (const Vec& r : roots)
                if ((r - o.u).lpNorm<Eigen::Infinity>() < 1e-8) dup = true;
            if (!dup) roots.push_back(o.u);
        } else if (o.singular_jacobian) {
            any_singular_jac = true;
        }
    }
    ControlSolve out;
    if (roots.empty()) {
        out.u = u0;
        out.status = any_singular_jac ? ControlSolve::Status::RegularityViolation
                                      : ControlSolve::Status::SingularControl;
        return out;
    }
    // Prefer a right-definite root; with several distinct roots and none
    // right-definite, signal singular control.
    int best = -1;
    for (size_t i = 0; i < roots.size(); ++i)
        if (right_definite(f, u_hessian(p, f, coords, roots[i]))) {
            best = static_cast<int>(i);
            break;
        }
    if (best < 0) {
        if (roots.size() > 1) {
            out.u = roots.front();
            out.status = ControlSolve::Status::SingularControl;
            return out;
        }
        best = 0;
    }
    out.u = roots[static_cast<size_t>(best)];
    out.hessian_definite = right_definite(f, u_hessian(p, f, coords, out.u));
    JetVec uj = seed_block(out.u, nu, 0, 1);
    Jet s = formulation_scalar(p, f, to_jets(coords), uj);
    out.residual = s.constant() ? 0.0 : s.g.lpNorm<Eigen::Infinity>();
    out.status = ControlSolve::Status::Ok;
    return out;
}

namespace {

Vec eliminate_u_fast(const OcpProblem& p, Formulation f, const Vec& coords, Vec& u_warm) {
    if (p.dim_u() == 0) return Vec();
    if (u_warm.size() != p.dim_u()) u_warm = Vec::Zero(p.dim_u());
    NewtonOutcome o = newton_on_gradient(p, f, coords, u_warm);
    if (!o.converged) {
        ControlSolve cs = solve_max_condition(p, f, coords, u_warm, true);
        if (!cs.ok())
            throw EvalError(std::string("control elimination failed (") +
                            (cs.status == ControlSolve::Status::SingularControl
                                 ? "singular control"
                                 : "regularity violation") +
                            ") in chart " + to_string(f));
        u_warm = cs.u;
        return cs.u;
    }
    u_warm = o.u;
    return o.u;
}

Vec hamiltonian_field(const OcpProblem& p, Formulation f, const Vec& coords, const Vec& u) {
    const int d = p.dim_q();
    JetVec cj = seed_jets(coords, 1);
    Jet h = formulation_scalar(p, f, cj, to_jets(u));
    Vec dh = h.constant() ? Vec::Zero(4 * d) : Vec(h.g);
    Vec r(4 * d);
    r.segment(0, d) = dh.segment(2 * d, d);        // derivative w.r.t. third block
    r.segment(d, d) = dh.segment(3 * d, d);        // derivative w.r.t. fourth block
    r.segment(2 * d, d) = -dh.segment(0, d);
    r.segment(3 * d, d) = -dh.segment(d, d);
    return r;
}

Vec lagrangian_field(const OcpProblem& p, Formulation f, const Vec& coords, const Vec& u) {
    const int d = p.dim_q();
    const int nu = p.dim_u();
    FlatFn fn = [&](const JetVec& in) -> JetVec {
        JetVec x = slice(in, 0, 4 * d), uu = slice(in, 4 * d, nu);
        return JetVec{formulation_scalar(p, f, x, uu)};
    };
    EliminatedScalar es = eliminate_control(fn, 4 * d, nu, coords, u);
    Mat M = es.hess.block(2 * d, 2 * d, 2 * d, 2 * d);
    Mat B = es.hess.block(2 * d, 0, 2 * d, 2 * d);
    Vec ydot = coords.segment(2 * d, 2 * d);
    Vec rhs = es.grad.head(2 * d) - B * ydot;
    Vec yddot = M.partialPivLu().solve(rhs);
    Vec r(4 * d);
    r.head(2 * d) = ydot;
    r.tail(2 * d) = yddot;
    return r;
}

}  // namespace

Vec field(const OcpProblem& p, Formulation f, const ExtendedState& state, Vec& u_warm) {
    Vec u = eliminate_u_fast(p, f, state.coords, u_warm);
    switch (f) {
        case Formulation::Pmp:
        case Formulation::NewHam:
            return hamiltonian_field(p, f, state.coords, u);
        case Formulation::NewLag:
        case Formulation::Forced:
            return lagrangian_field(p, f, state.coords, u);
    }
    throw std::logic_error("unreachable");
}

Vec field_alpha(const OcpProblem& p, const Vec& coords, const Vec& u) {
    // Push the Pontryagin field through alpha^-1: the Hamilton field of
    // H_-1 read in the (q, kappa, v_q, v_kappa) coordinates.
    const int d = p.dim_q();
    Vec pmp_coords(4 * d);
    pmp_coords << coords.segment(0, d), coords.segment(2 * d, d), coords.segment(3 * d, d),
        coords.segment(d, d);
    Vec xh = hamiltonian_field(p, Formulation::Pmp, pmp_coords, u);
    Vec r(4 * d);
    r.segment(0, d) = xh.segment(0, d);          // q-slot
    r.segment(d, d) = xh.segment(3 * d, d);      // kappa-slot <- lambda_v slot
    r.segment(2 * d, d) = xh.segment(d, d);      // v_q-slot <- v slot
    r.segment(3 * d, d) = xh.segment(2 * d, d);  // v_kappa-slot <- lambda_q slot
    return r;
}

namespace {

// lambda_q = D2 C^T - D2 Xv^T kappa - v_kappa at the eliminated control.
Vec lambda_q_from_newlag(const OcpProblem& p, const Vec& q, const Vec& k, const Vec& vq,
                         const Vec& vk, const Vec& u) {
    const int d = p.dim_q();
    JetVec vj = seed_block(vq, d, 0, 1);
    JetVec xv = p.sode.accel(to_jets(q), vj, to_jets(u));
    Jet c = p.cost.value(to_jets(q), vj, to_jets(u));
    Vec lq = -vk;
    for (int i = 0; i < d; ++i) {
        if (!c.constant()) lq[i] += c.g[i];
        for (int j = 0; j < d; ++j)
            if (!xv[j].constant()) lq[i] -= xv[j].g[i] * k[j];
    }
    return lq;
}

// Time derivative of D22 L(q, v_q) along (v_q, X_v(q, v_q, u)).
Mat mass_matrix_rate(const OcpProblem& p, const Vec& q, const Vec& vq, const Vec& u, Mat* mass) {
    const int d = p.dim_q();
    JetVec qj = seed_block(q, 2 * d, 0, 1);
    JetVec vj = seed_block(vq, 2 * d, d, 1);
    LagrangianHessian H = lagrangian_hessian(*p.lagrangian, qj, vj);
    Vec xv(d);
    {
        JetVec a = p.sode.accel(to_jets(q), to_jets(vq), to_jets(u));
        for (int i = 0; i < d; ++i) xv[i] = a[i].v;
    }
    Mat rate(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double r = 0.0;
            const Jet& e = H.hvv[i][j];
            if (!e.constant())
                for (int k = 0; k < d; ++k) r += e.g[k] * vq[k] + e.g[d + k] * xv[k];
            rate(i, j) = r;
            if (mass) (*mass)(i, j) = e.v;
        }
    return rate;
}

Vec transport_step(const OcpProblem& p, Formulation from, Formulation to, const Vec& x,
                   const Vec& u) {
    const int d = p.dim_q();
    Vec q = x.segment(0, d), b1 = x.segment(d, d), b2 = x.segment(2 * d, d),
        b3 = x.segment(3 * d, d);
    Vec out(4 * d);

    if (from == Formulation::Pmp && to == Formulation::NewLag) {
        Vec v = b1, lq = b2, lv = b3;
        // v_kappa = D2 C^T - D2 Xv^T lambda_v - lambda_q
        JetVec vj = seed_block(v, d, 0, 1);
        JetVec xv = p.sode.accel(to_jets(q), vj, to_jets(u));
        Jet c = p.cost.value(to_jets(q), vj, to_jets(u));
        Vec vk = -lq;
        for (int i = 0; i < d; ++i) {
            if (!c.constant()) vk[i] += c.g[i];
            for (int j = 0; j < d; ++j)
                if (!xv[j].constant()) vk[i] -= xv[j].g[i] * lv[j];
        }
        out << q, lv, v, vk;
        return out;
    }
    if (from == Formulation::NewLag && to == Formulation::Pmp) {
        Vec k = b1, vq = b2, vk = b3;
        Vec lq = lambda_q_from_newlag(p, q, k, vq, vk, u);
        out << q, vq, lq, k;
        return out;
    }
    if (from == Formulation::NewLag && to == Formulation::NewHam) {
        NewLagPoint pt{q, b1, b2, b3, u};
        NewHamPoint h = fiber_derivative_newlag(p, pt);
        out << h.q, h.k, h.pq, h.pk;
        return out;
    }
    if (from == Formulation::NewHam && to == Formulation::NewLag) {
        NewHamPoint pt{q, b1, b2, b3, u};
        NewLagPoint l = fiber_derivative_newlag_inverse(p, pt);
        out << l.q, l.k, l.vq, l.vk;
        return out;
    }
    if (from == Formulation::Forced && to == Formulation::NewLag) {
        if (!p.lagrangian) throw UnsupportedFormulationError("forced chart needs a Lagrangian");
        Vec xi = b1, vq = b2, vxi = b3;
        Mat mass(d, d);
        Mat rate = mass_matrix_rate(p, q, vq, u, &mass);
        Vec k = mass * xi;
        Vec vk = rate * xi + mass * vxi;
        out << q, k, vq, vk;
        return out;
    }
    if (from == Formulation::NewLag && to == Formulation::Forced) {
        if (!p.lagrangian) throw UnsupportedFormulationError("forced chart needs a Lagrangian");
        Vec k = b1, vq = b2, vk = b3;
        Mat mass(d, d);
        Mat rate = mass_matrix_rate(p, q, vq, u, &mass);
        Eigen::PartialPivLU<Mat> lu(mass);
        Vec xi = lu.solve(k);
        Vec vxi = lu.solve(vk - rate * xi);
        out << q, xi, vq, vxi;
        return out;
    }
    throw std::invalid_argument("transport_coords: unsupported direct transition");
}

}  // namespace

Vec transport_coords(const OcpProblem& p, Formulation from, Formulation to, const Vec& coords,
                     const Vec& u) {
    if (from == to) return coords;
    if (from == Formulation::NewLag || to == Formulation::NewLag)
        return transport_step(p, from, to, coords, u);
    Vec hub = transport_step(p, from, Formulation::NewLag, coords, u);
    return transport_step(p, Formulation::NewLag, to, hub, u);
}

ExtendedState identify(const ExtendedState& state, Formulation to, const OcpProblem& p) {
    ExtendedState out;
    out.form = to;
    out.t = state.t;
    if (state.form == to) {
        out.coords = state.coords;
        return out;
    }
    Vec warm = Vec::Zero(p.dim_u());
    Vec u = eliminate_u_fast(p, state.form, state.coords, warm);
    out.coords = transport_coords(p, state.form, to, state.coords, u);
    return out;
}

TransversalityReport transversality_residual(const OcpProblem& p, const ExtendedState& terminal,
                                             Formulation f) {
    const int d = p.dim_q();
    const Vec& x = terminal.coords;
    Vec q = x.segment(0, d), b1 = x.segment(d, d), b2 = x.segment(2 * d, d),
        b3 = x.segment(3 * d, d);
    TransversalityReport rep;
    rep.residual = Vec::Zero(2 * d);

    if (p.boundary.mode == TerminalMode::Fixed) {
        Vec v_like = (f == Formulation::NewHam) ? b3 : (f == Formulation::Pmp ? b1 : b2);
        rep.residual << q - p.boundary.qT, v_like - p.boundary.vT;
        return rep;
    }

    // Free mode: transversality from the Mayer term (zero if absent).
    auto mayer_grad = [&](const Vec& qq, const Vec& vv, Vec& dq, Vec& dv) {
        dq = Vec::Zero(d);
        dv = Vec::Zero(d);
        if (!p.mayer) return;
        JetVec qj = seed_block(qq, 2 * d, 0, 1);
        JetVec vj = seed_block(vv, 2 * d, d, 1);
        Jet phi = p.mayer->value(qj, vj);
        if (!phi.constant()) {
            dq = phi.g.segment(0, d);
            dv = phi.g.segment(d, d);
        }
    };

    Vec warm = Vec::Zero(p.dim_u());
    switch (f) {
        case Formulation::Pmp: {
            Vec dq, dv;
            mayer_grad(q, b1, dq, dv);
            rep.residual << b2 + dq, b3 + dv;
            return rep;
        }
        case Formulation::NewLag: {
            Vec k = b1, vq = b2, vk = b3;
            Vec dq, dv;
            mayer_grad(q, vq, dq, dv);
            Vec u = eliminate_u_fast(p, Formulation::NewLag, x, warm);
            Vec lq = lambda_q_from_newlag(p, q, k, vq, vk, u);
            rep.residual << k + dv, lq + dq;
            // Second-order displayed variant: v_kappa(T) vs
            // D1 phi^T + D2 C^T + (D2 phi . D2 f)^T, reported only.
            JetVec vj = seed_block(vq, d, 0, 1);
            JetVec xv = p.sode.accel(to_jets(q), vj, to_jets(u));
            Jet c = p.cost.value(to_jets(q), vj, to_jets(u));
            Vec displayed = dq;
            for (int i = 0; i < d; ++i) {
                if (!c.constant()) displayed[i] += c.g[i];
                for (int j = 0; j < d; ++j)
                    if (!xv[j].constant()) displayed[i] += dv[j] * xv[j].g[i];
            }
            rep.displayed_gap = (vk - displayed).lpNorm<Eigen::Infinity>();
            return rep;
        }
        case Formulation::NewHam: {
            Vec k = b1, pq = b2, pk = b3;
            Vec dq, dv;
            mayer_grad(q, pk, dq, dv);
            rep.residual << k + dv, pq - dq;
            return rep;
        }
        case Formulation::Forced: {
            ExtendedState nl = identify(terminal, Formulation::NewLag, p);
            TransversalityReport base = transversality_residual(p, nl, Formulation::NewLag);
            // Displayed variant of the forced chart: D22 L xi'(T) vs
            // D1 phi^T + D2 C^T - D2 fL^T xi, reported only.
            Vec xi = b1, vq = b2, vxi = b3;
            Vec dq, dv;
            mayer_grad(q, vq, dq, dv);
            Vec u = eliminate_u_fast(p, Formulation::Forced, x, warm);
            Mat mass(d, d);
            mass_matrix_rate(p, q, vq, u, &mass);
            JetVec vj = seed_block(vq, d, 0, 1);
            JetVec fl = p.lagrangian->force(to_jets(q), vj, to_jets(u));
            Jet c = p.cost.value(to_jets(q), vj, to_jets(u));
            Vec displayed = dq;
            for (int i = 0; i < d; ++i) {
                if (!c.constant()) displayed[i] += c.g[i];
                for (int j = 0; j < d; ++j)
                    if (!fl[j].constant()) displayed[i] -= fl[j].g[i] * xi[j];
            }
            base.displayed_gap = (mass * vxi - displayed).lpNorm<Eigen::Infinity>();
            return base;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace socp
