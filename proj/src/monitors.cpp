#include "socp/monitors.hpp"

namespace socp {

namespace {

struct GeneratorData {
    Vec xq;   // X^Q(q)
    Mat dxq;  // Jacobian of the generator at q
};

GeneratorData generator_data(const OneParamAction& a, const Vec& q) {
    auto fn = a.generator_analytic ? a.generator_analytic : generator_eval(a).XQ;
    JetVec out = fn(seed_jets(q, 1));
    const int d = static_cast<int>(q.size());
    GeneratorData g;
    g.xq = Vec(d);
    g.dxq = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        g.xq[i] = out[i].v;
        if (!out[i].constant()) g.dxq.row(i) = out[i].g.transpose();
    }
    return g;
}

// Invariance spot check of H_-1 under the lifted action at a few trace
// points; used only to set the warning flag on the Noether monitors.
void symmetry_check(const Trajectory& traj, const OneParamAction& a, const OcpProblem& p,
                    NoetherSeries& out) {
    const int d = p.dim_q();
    auto h_of = [&](const TwistedPoint& tp) {
        PmpPoint pp = to_pmp(tp);
        return pontryagin_h(p, pp);
    };
    out.symmetry_residual = 0.0;
    size_t stride = std::max<size_t>(1, traj.nodes.size() / 3);
    for (size_t i = 0; i < traj.nodes.size(); i += stride) {
        const auto& node = traj.nodes[i];
        Vec pm = transport_coords(p, traj.form, Formulation::Pmp, node.coords, node.u);
        TwistedPoint tp(Chart::PmpE, pm.segment(0, d), pm.segment(d, d), pm.segment(2 * d, d),
                        pm.segment(3 * d, d), node.u);
        out.symmetry_residual = std::max(
            out.symmetry_residual, invariance_residual(h_of, a, tp, {-0.1, -0.01, 0.01, 0.1}));
    }
    out.symmetric = out.symmetry_residual <= 1e-8;
}

}  // namespace

MonitorSeries energy_monitor(const Trajectory& traj, const OcpProblem& p) {
    const int d = p.dim_q();
    MonitorSeries s;
    s.name = "E";
    for (const auto& node : traj.nodes) {
        Vec nl = transport_coords(p, traj.form, Formulation::NewLag, node.coords, node.u);
        NewLagPoint pt{nl.segment(0, d), nl.segment(d, d), nl.segment(2 * d, d),
                       nl.segment(3 * d, d), node.u};
        s.values.push_back(new_energy(p, pt));
    }
    return s;
}

MonitorSeries pontryagin_monitor(const Trajectory& traj, const OcpProblem& p) {
    const int d = p.dim_q();
    MonitorSeries s;
    s.name = "H";
    for (const auto& node : traj.nodes) {
        Vec pm = transport_coords(p, traj.form, Formulation::Pmp, node.coords, node.u);
        PmpPoint pt{pm.segment(0, d), pm.segment(d, d), pm.segment(2 * d, d), pm.segment(3 * d, d),
                    node.u};
        s.values.push_back(pontryagin_h(p, pt));
    }
    return s;
}

NoetherSeries noether_pmp(const Trajectory& traj, const OneParamAction& a, const OcpProblem& p) {
    const int d = p.dim_q();
    NoetherSeries out;
    out.series.name = "I_" + a.name;
    for (const auto& node : traj.nodes) {
        Vec pm = transport_coords(p, traj.form, Formulation::Pmp, node.coords, node.u);
        Vec q = pm.segment(0, d), v = pm.segment(d, d), lq = pm.segment(2 * d, d),
            lv = pm.segment(3 * d, d);
        GeneratorData g = generator_data(a, q);
        out.series.values.push_back(lq.dot(g.xq) + lv.dot(g.dxq * v));
    }
    symmetry_check(traj, a, p, out);
    return out;
}

NoetherSeries noether_newlag(const Trajectory& traj, const OneParamAction& a,
                             const OcpProblem& p) {
    const int d = p.dim_q();
    NoetherSeries out;
    out.series.name = "I_Lt_" + a.name;
    for (const auto& node : traj.nodes) {
        Vec nl = transport_coords(p, traj.form, Formulation::NewLag, node.coords, node.u);
        Vec q = nl.segment(0, d), k = nl.segment(d, d), vq = nl.segment(2 * d, d),
            vk = nl.segment(3 * d, d);
        // lambda_q-identified pairing: (D2 C - D2 Xv^T k - v_k) . X^Q + k . DX^Q v_q.
        JetVec vj = seed_block(vq, d, 0, 1);
        JetVec xv = p.sode.accel(to_jets(q), vj, to_jets(node.u));
        Jet c = p.cost.value(to_jets(q), vj, to_jets(node.u));
        Vec lam = -vk;
        for (int i = 0; i < d; ++i) {
            if (!c.constant()) lam[i] += c.g[i];
            for (int j = 0; j < d; ++j)
                if (!xv[j].constant()) lam[i] -= xv[j].g[i] * k[j];
        }
        GeneratorData g = generator_data(a, q);
        out.series.values.push_back(lam.dot(g.xq) + k.dot(g.dxq * vq));
    }
    symmetry_check(traj, a, p, out);
    return out;
}

NoetherSeries noether_newham(const Trajectory& traj, const OneParamAction& a,
                             const OcpProblem& p) {
    const int d = p.dim_q();
    NoetherSeries out;
    out.series.name = "I_Ht_" + a.name;
    for (const auto& node : traj.nodes) {
        Vec nh = transport_coords(p, traj.form, Formulation::NewHam, node.coords, node.u);
        Vec q = nh.segment(0, d), k = nh.segment(d, d), pq = nh.segment(2 * d, d),
            pk = nh.segment(3 * d, d);
        GeneratorData g = generator_data(a, q);
        // p_q = -lambda_q; expressed to match the PMP momentum pointwise.
        out.series.values.push_back(-pq.dot(g.xq) + k.dot(g.dxq * pk));
    }
    symmetry_check(traj, a, p, out);
    return out;
}

MechanicalNoether noether_mechanical(const Trajectory& traj, const OneParamAction& a,
                                     const OcpProblem& p) {
    if (!p.lagrangian)
        throw UnsupportedFormulationError("mechanical Noether monitors need a Lagrangian");
    const int d = p.dim_q();
    MechanicalNoether out;
    out.I_L.name = "I_L_" + a.name;
    out.I_Ltilde.name = "I_LtL_" + a.name;
    for (const auto& node : traj.nodes) {
        Vec pm = transport_coords(p, traj.form, Formulation::Pmp, node.coords, node.u);
        Vec q = pm.segment(0, d), v = pm.segment(d, d);
        GeneratorData g = generator_data(a, q);
        JetVec d1, d2;
        lagrangian_gradient(*p.lagrangian, to_jets(q), to_jets(v), d1, d2);
        JetVec fl = p.lagrangian->force(to_jets(q), to_jets(v), to_jets(node.u));
        double il = 0.0, dil = 0.0, pairing = 0.0;
        Vec dxqv = g.dxq * v;
        for (int i = 0; i < d; ++i) {
            il += d2[i].v * g.xq[i];
            dil += (d1[i].v + fl[i].v) * g.xq[i] + d2[i].v * dxqv[i];
            pairing += fl[i].v * g.xq[i];
        }
        out.I_L.values.push_back(il);
        out.dIL_dt.push_back(dil);
        out.force_pairing.push_back(pairing);
        double fnorm = 0.0;
        for (int i = 0; i < d; ++i) fnorm = std::max(fnorm, std::abs(fl[i].v));
        if (std::abs(pairing) > 1e-10 * (1.0 + fnorm)) out.orthogonal = false;
        out.orthogonality_residual = std::max(out.orthogonality_residual, std::abs(pairing));

        // Image momenta of the forced fiber derivative.
        Vec fc = transport_coords(p, traj.form, Formulation::Forced, node.coords, node.u);
        ForcedPoint fp{fc.segment(0, d), fc.segment(d, d), fc.segment(2 * d, d),
                       fc.segment(3 * d, d), node.u};
        ForcedImagePoint ip = forced_fiber_derivative(p, fp);
        out.I_Ltilde.values.push_back(ip.wq.dot(g.xq) + ip.wxi.dot(g.dxq * fp.xi));
    }
    return out;
}

namespace {

// Shooting on the window problem with (q, kappa) fixed at both ends: the
// unknowns are the initial velocities (v_q, v_kappa)(a).
struct QkWindow {
    OcpProblem prob;  // boundary.T = window length
    Vec qa, ka, qb, kb;
    int N;
};

struct QkSolution {
    Trajectory traj;
    bool converged = false;
    Vec unknowns;
};

QkSolution solve_window_qk(const QkWindow& w, const Vec& guess, double tol) {
    const int d = w.prob.dim_q();
    auto F = [&](const Vec& g) {
        ExtendedState s;
        s.form = Formulation::NewLag;
        s.t = 0.0;
        s.coords = Vec(4 * d);
        s.coords << w.qa, w.ka, g.segment(0, d), g.segment(d, d);
        Trajectory traj = integrate_ivp(w.prob, Formulation::NewLag, s, w.N);
        const Vec& xb = traj.nodes.back().coords;
        Vec r(2 * d);
        r << xb.segment(0, d) - w.qb, xb.segment(d, d) - w.kb;
        return r;
    };
    NewtonResult nr = newton_solve(F, guess, tol);
    QkSolution sol;
    sol.converged = nr.converged;
    sol.unknowns = nr.x;
    ExtendedState s;
    s.form = Formulation::NewLag;
    s.t = 0.0;
    s.coords = Vec(4 * d);
    s.coords << w.qa, w.ka, nr.x.segment(0, d), nr.x.segment(d, d);
    sol.traj = integrate_ivp(w.prob, Formulation::NewLag, s, w.N);
    return sol;
}

double window_cost_integral(const OcpProblem& p, const Trajectory& traj) {
    const int d = p.dim_q();
    std::vector<double> c;
    for (const auto& node : traj.nodes) {
        Vec pm = transport_coords(p, traj.form, Formulation::Pmp, node.coords, node.u);
        c.push_back(
            p.cost.value(to_jets(Vec(pm.segment(0, d))), to_jets(Vec(pm.segment(d, d))),
                         to_jets(node.u))
                .v);
    }
    return simpson(c, traj.h());
}

double window_newlag_integral(const OcpProblem& p, const Trajectory& traj) {
    const int d = p.dim_q();
    std::vector<double> c;
    for (const auto& node : traj.nodes) {
        Vec nl = transport_coords(p, traj.form, Formulation::NewLag, node.coords, node.u);
        NewLagPoint pt{nl.segment(0, d), nl.segment(d, d), nl.segment(2 * d, d),
                       nl.segment(3 * d, d), node.u};
        c.push_back(new_lagrangian(p, pt));
    }
    return simpson(c, traj.h());
}

}  // namespace

GeneratingChecks generating_checks(const OcpProblem& p, Formulation f, double a_frac,
                                   double b_frac, int N, double tol_deriv, double tol_mixed) {
    GeneratingChecks out;
    const int d = p.dim_q();
    const double delta = 1e-4;
    const double tol_inner = 1e-11;

    // Base solve over the whole horizon.
    SolverReport base = solve_bvp(p, f, Vec::Zero(2 * d), N, 1e-10);
    if (!base.converged) {
        out.all_pass = false;
        out.identities.push_back({"base solve", false, "did not converge"});
        return out;
    }
    Trajectory base_pmp = identify_trajectory(base.trajectory, Formulation::Pmp, p);

    int ia = static_cast<int>(std::lround(a_frac * N));
    int ib = static_cast<int>(std::lround(b_frac * N));
    const int Nw = ib - ia;
    const double h = base.trajectory.h();

    auto node_vals = [&](const Trajectory& t, int i) { return t.nodes[i].coords; };
    Vec xa = node_vals(base_pmp, ia), xb = node_vals(base_pmp, ib);
    Vec qa = xa.segment(0, d), va = xa.segment(d, d), lqa = xa.segment(2 * d, d),
        lva = xa.segment(3 * d, d);
    Vec qb = xb.segment(0, d), vb = xb.segment(d, d), lqb = xb.segment(2 * d, d),
        lvb = xb.segment(3 * d, d);

    OcpProblem wp = p;
    wp.boundary.T = Nw * h;
    wp.boundary.mode = TerminalMode::Fixed;
    wp.mayer.reset();

    auto record = [&](const std::string& name, double got, double want, double tol) {
        double res = std::abs(got - want);
        bool pass = res <= tol;
        out.identities.push_back(
            {name, pass, "residual " + std::to_string(res) + " (tol " + std::to_string(tol) + ")"});
        if (!pass) out.all_pass = false;
        if (tol == tol_deriv)
            out.worst_derivative_residual = std::max(out.worst_derivative_residual, res);
    };

    // --- S_C identities: window BVP in the PMP chart with fixed (q, v). ---
    auto sc_value = [&](const Vec& qa_, const Vec& va_, const Vec& qb_, const Vec& vb_) {
        OcpProblem w = wp;
        w.boundary.q0 = qa_;
        w.boundary.v0 = va_;
        w.boundary.qT = qb_;
        w.boundary.vT = vb_;
        Vec guess(2 * d);
        guess << lqa, lva;
        SolverReport rep = solve_bvp(w, Formulation::Pmp, guess, Nw, tol_inner);
        if (!rep.converged) throw EvalError("generating_checks: window solve diverged");
        return window_cost_integral(w, rep.trajectory);
    };
    for (int i = 0; i < d; ++i) {
        auto fd = [&](auto setter) {
            Vec qap = qa, vap = va, qbp = qb, vbp = vb;
            setter(qap, vap, qbp, vbp, delta);
            double plus = sc_value(qap, vap, qbp, vbp);
            qap = qa, vap = va, qbp = qb, vbp = vb;
            setter(qap, vap, qbp, vbp, -delta);
            double minus = sc_value(qap, vap, qbp, vbp);
            return (plus - minus) / (2.0 * delta);
        };
        record("D_qa S_C = -lambda_q(a)",
               fd([i](Vec& q_, Vec&, Vec&, Vec&, double e) { q_[i] += e; }), -lqa[i], tol_deriv);
        record("D_va S_C = -lambda_v(a)",
               fd([i](Vec&, Vec& v_, Vec&, Vec&, double e) { v_[i] += e; }), -lva[i], tol_deriv);
        record("D_qb S_C = lambda_q(b)",
               fd([i](Vec&, Vec&, Vec& q_, Vec&, double e) { q_[i] += e; }), lqb[i], tol_deriv);
        record("D_vb S_C = lambda_v(b)",
               fd([i](Vec&, Vec&, Vec&, Vec& v_, double e) { v_[i] += e; }), lvb[i], tol_deriv);
    }

    // --- S_Lt identities: window BVP in the NewLag chart with fixed (q, kappa). ---
    Vec ka = lva, kb = lvb;  // kappa = lambda_v along the identified base
    Trajectory base_nl = identify_trajectory(base.trajectory, Formulation::NewLag, p);
    Vec nl_a = node_vals(base_nl, ia);
    Vec vqa = nl_a.segment(2 * d, d), vka = nl_a.segment(3 * d, d);
    struct SltEval {
        double integral;
        Vec va, vb;  // solution velocities at the window ends
    };
    auto slt_value = [&](const Vec& qa_, const Vec& ka_, const Vec& qb_, const Vec& kb_) {
        QkWindow w{wp, qa_, ka_, qb_, kb_, Nw};
        Vec guess(2 * d);
        guess << vqa, vka;
        QkSolution sol = solve_window_qk(w, guess, tol_inner);
        if (!sol.converged) throw EvalError("generating_checks: (q,kappa) window solve diverged");
        SltEval ev;
        ev.integral = window_newlag_integral(wp, sol.traj);
        ev.va = sol.traj.nodes.front().coords.segment(2 * d, d);
        ev.vb = sol.traj.nodes.back().coords.segment(2 * d, d);
        return ev;
    };
    for (int i = 0; i < d; ++i) {
        auto fd_slt = [&](auto setter, double& bracket_deriv) {
            Vec qap = qa, kap = ka, qbp = qb, kbp = kb;
            setter(qap, kap, qbp, kbp, delta);
            SltEval plus = slt_value(qap, kap, qbp, kbp);
            double bplus = kbp.dot(plus.vb) - kap.dot(plus.va) - plus.integral;
            qap = qa, kap = ka, qbp = qb, kbp = kb;
            setter(qap, kap, qbp, kbp, -delta);
            SltEval minus = slt_value(qap, kap, qbp, kbp);
            double bminus = kbp.dot(minus.vb) - kap.dot(minus.va) - minus.integral;
            bracket_deriv = (bplus - bminus) / (2.0 * delta);
            return (plus.integral - minus.integral) / (2.0 * delta);
        };
        double bracket;
        record("D_qa S_Lt = lambda_q(a)",
               fd_slt([i](Vec& q_, Vec&, Vec&, Vec&, double e) { q_[i] += e; }, bracket), lqa[i],
               tol_deriv);
        record("D_ka S_Lt = -v(a)",
               fd_slt([i](Vec&, Vec& k_, Vec&, Vec&, double e) { k_[i] += e; }, bracket), -va[i],
               tol_deriv);
        record("D_ka [kv - S_Lt] = 0", bracket, 0.0, tol_deriv);
        record("D_qb S_Lt = -lambda_q(b)",
               fd_slt([i](Vec&, Vec&, Vec& q_, Vec&, double e) { q_[i] += e; }, bracket), -lqb[i],
               tol_deriv);
        record("D_kb S_Lt = v(b)",
               fd_slt([i](Vec&, Vec&, Vec&, Vec& k_, double e) { k_[i] += e; }, bracket), vb[i],
               tol_deriv);
        record("D_kb [kv - S_Lt] = 0", bracket, 0.0, tol_deriv);
    }

    // --- Mixed-kind relation on the base trace. ---
    {
        Trajectory win;
        win.problem = p.name;
        win.form = base_nl.form;
        win.T = Nw * h;
        win.N = Nw;
        win.nodes.assign(base_nl.nodes.begin() + ia, base_nl.nodes.begin() + ib + 1);
        double slt = window_newlag_integral(p, win);
        Trajectory win_pmp;
        win_pmp.problem = p.name;
        win_pmp.form = base_pmp.form;
        win_pmp.T = Nw * h;
        win_pmp.N = Nw;
        win_pmp.nodes.assign(base_pmp.nodes.begin() + ia, base_pmp.nodes.begin() + ib + 1);
        double sc = window_cost_integral(p, win_pmp);
        double relation = kb.dot(vb) - ka.dot(va) - slt - sc;
        out.mixed_relation_residual = std::abs(relation);
        bool pass = out.mixed_relation_residual <= tol_mixed;
        if (!pass) out.all_pass = false;
        out.identities.push_back({"kv(b) - kv(a) - S_Lt = S_C", pass,
                                  "residual " + std::to_string(out.mixed_relation_residual)});
    }

    return out;
}

}  // namespace socp
