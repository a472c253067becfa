#include "socp/shooting.hpp"

#include <cstdio>
#include <ostream>

namespace socp {

namespace {

// E and H monitors at a node, transported at the recorded node control.
void attach_monitors(const OcpProblem& p, Formulation f, TrajectoryNode& node) {
    const int d = p.dim_q();
    Vec nl = transport_coords(p, f, Formulation::NewLag, node.coords, node.u);
    NewLagPoint lp{nl.segment(0, d), nl.segment(d, d), nl.segment(2 * d, d), nl.segment(3 * d, d),
                   node.u};
    node.monitors["E"] = new_energy(p, lp);
    Vec pm = transport_coords(p, f, Formulation::Pmp, node.coords, node.u);
    PmpPoint pp{pm.segment(0, d), pm.segment(d, d), pm.segment(2 * d, d), pm.segment(3 * d, d),
                node.u};
    node.monitors["H"] = pontryagin_h(p, pp);
}

}  // namespace

Trajectory integrate_ivp(const OcpProblem& p, Formulation f, const ExtendedState& x0, int N) {
    if (N < 2) throw std::invalid_argument("integrate_ivp: N must be at least 2");
    Trajectory traj;
    traj.problem = p.name;
    traj.form = f;
    traj.T = p.boundary.T;
    traj.N = N;
    const double h = traj.T / N;
    Vec warm = Vec::Zero(p.dim_u());

    ExtendedState s = x0;
    auto eval = [&](double t, const Vec& c) {
        ExtendedState tmp{f, t, c};
        return field(p, f, tmp, warm);
    };

    for (int k = 0; k <= N; ++k) {
        TrajectoryNode node;
        node.t = x0.t + k * h;
        node.coords = s.coords;
        // Record the eliminated control at the node.
        Vec u_node = warm;
        eliminate_node_control(p, f, s.coords, u_node);
        node.u = u_node;
        attach_monitors(p, f, node);
        traj.nodes.push_back(std::move(node));
        if (k == N) break;
        double t = x0.t + k * h;
        Vec k1 = eval(t, s.coords);
        Vec k2 = eval(t + 0.5 * h, s.coords + 0.5 * h * k1);
        Vec k3 = eval(t + 0.5 * h, s.coords + 0.5 * h * k2);
        Vec k4 = eval(t + h, s.coords + h * k3);
        s.coords += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s.t = t + h;
    }
    return traj;
}

void eliminate_node_control(const OcpProblem& p, Formulation f, const Vec& coords, Vec& u) {
    ExtendedState s{f, 0.0, coords};
    Vec warm = u;
    field(p, f, s, warm);  // warm is updated to the eliminated control
    u = warm;
}

Trajectory integrate_pmp_scheduled(const OcpProblem& p, const ExtendedState& x0, int N,
                                   const std::function<Vec(double)>& u_of_t) {
    Trajectory traj;
    traj.problem = p.name;
    traj.form = Formulation::Pmp;
    traj.T = p.boundary.T;
    traj.N = N;
    const double h = traj.T / N;
    const int d = p.dim_q();
    auto eval = [&](double t, const Vec& c) {
        Vec u = u_of_t(t);
        JetVec cj = seed_jets(c, 1);
        Jet hval = pontryagin_h_jet(p, JetVec(cj.begin(), cj.begin() + d),
                                    JetVec(cj.begin() + d, cj.begin() + 2 * d),
                                    JetVec(cj.begin() + 2 * d, cj.begin() + 3 * d),
                                    JetVec(cj.begin() + 3 * d, cj.end()), to_jets(u));
        Vec dh = hval.constant() ? Vec::Zero(4 * d) : Vec(hval.g);
        Vec r(4 * d);
        r.segment(0, d) = dh.segment(2 * d, d);
        r.segment(d, d) = dh.segment(3 * d, d);
        r.segment(2 * d, d) = -dh.segment(0, d);
        r.segment(3 * d, d) = -dh.segment(d, d);
        return r;
    };
    Vec x = x0.coords;
    for (int k = 0; k <= N; ++k) {
        double t = x0.t + k * h;
        TrajectoryNode node;
        node.t = t;
        node.coords = x;
        node.u = u_of_t(t);
        attach_monitors(p, Formulation::Pmp, node);
        traj.nodes.push_back(std::move(node));
        if (k == N) break;
        Vec k1 = eval(t, x);
        Vec k2 = eval(t + 0.5 * h, x + 0.5 * h * k1);
        Vec k3 = eval(t + 0.5 * h, x + 0.5 * h * k2);
        Vec k4 = eval(t + h, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return traj;
}

Trajectory integrate_sode(const OcpProblem& p, const Vec& q0, const Vec& v0, const Vec& u_fixed,
                          int N) {
    const int d = p.dim_q();
    Trajectory traj;
    traj.problem = p.name;
    traj.form = Formulation::Pmp;
    traj.T = p.boundary.T;
    traj.N = N;
    const double h = traj.T / N;
    Vec x(2 * d);
    x << q0, v0;
    auto eval = [&](const Vec& c) {
        JetVec xv = p.sode.accel(to_jets(Vec(c.segment(0, d))), to_jets(Vec(c.segment(d, d))),
                                 to_jets(u_fixed));
        Vec r(2 * d);
        r.segment(0, d) = c.segment(d, d);
        for (int i = 0; i < d; ++i) r[d + i] = xv[i].v;
        return r;
    };
    for (int k = 0; k <= N; ++k) {
        TrajectoryNode node;
        node.t = k * h;
        node.coords = Vec::Zero(4 * d);
        node.coords.segment(0, 2 * d) = x;
        node.u = u_fixed;
        traj.nodes.push_back(std::move(node));
        if (k == N) break;
        Vec k1 = eval(x);
        Vec k2 = eval(x + 0.5 * h * k1);
        Vec k3 = eval(x + 0.5 * h * k2);
        Vec k4 = eval(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return traj;
}

ExtendedState shooting_initial_state(const OcpProblem& p, Formulation f, const Vec& guess) {
    const int d = p.dim_q();
    if (guess.size() != 2 * d)
        throw std::invalid_argument("shooting guess must have 2 dim_q entries");
    Vec g1 = guess.segment(0, d), g2 = guess.segment(d, d);
    ExtendedState s;
    s.form = f;
    s.t = 0.0;
    s.coords = Vec(4 * d);
    switch (f) {
        case Formulation::Pmp:
            s.coords << p.boundary.q0, p.boundary.v0, g1, g2;
            break;
        case Formulation::NewLag:
            s.coords << p.boundary.q0, g1, p.boundary.v0, g2;
            break;
        case Formulation::NewHam:
            s.coords << p.boundary.q0, g1, g2, p.boundary.v0;
            break;
        case Formulation::Forced:
            s.coords << p.boundary.q0, g1, p.boundary.v0, g2;
            break;
    }
    return s;
}

Vec shoot(const OcpProblem& p, Formulation f, const Vec& guess, int N) {
    Trajectory traj = integrate_ivp(p, f, shooting_initial_state(p, f, guess), N);
    ExtendedState terminal{f, traj.nodes.back().t, traj.nodes.back().coords};
    return transversality_residual(p, terminal, f).residual;
}

NewtonResult newton_solve(const std::function<Vec(const Vec&)>& F, const Vec& x0, double tol,
                          int max_iter) {
    NewtonResult out;
    out.x = x0;
    const int n = static_cast<int>(x0.size());
    Vec r = F(out.x);
    out.residual = r.lpNorm<Eigen::Infinity>();
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        if (out.residual <= tol) {
            out.converged = true;
            return out;
        }
        const double step = 1e-6 * (1.0 + out.x.norm());
        Mat J(n, n);
        for (int j = 0; j < n; ++j) {
            Vec xp = out.x, xm = out.x;
            xp[j] += step;
            xm[j] -= step;
            J.col(j) = (F(xp) - F(xm)) / (2.0 * step);
        }
        Vec d = J.fullPivLu().solve(r);
        double alpha = 1.0;
        bool moved = false;
        while (alpha >= 1e-8) {
            Vec xt = out.x - alpha * d;
            Vec rt;
            try {
                rt = F(xt);
            } catch (const EvalError&) {
                alpha *= 0.5;
                continue;
            }
            if (rt.lpNorm<Eigen::Infinity>() < out.residual) {
                out.x = xt;
                r = rt;
                out.residual = rt.lpNorm<Eigen::Infinity>();
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) return out;  // stalled; best iterate kept
    }
    out.converged = out.residual <= tol;
    return out;
}

SolverReport solve_bvp(const OcpProblem& p, Formulation f, const Vec& guess, int N, double tol) {
    if (tol <= 0) throw std::invalid_argument("solve_bvp: tol must be positive");
    auto F = [&](const Vec& g) { return shoot(p, f, g, N); };
    NewtonResult nr = newton_solve(F, guess, tol);
    SolverReport rep;
    rep.converged = nr.converged;
    rep.iterations = nr.iterations;
    rep.residual = nr.residual;
    rep.initial_unknowns = nr.x;
    rep.trajectory = integrate_ivp(p, f, shooting_initial_state(p, f, nr.x), N);
    rep.cost = cost_quadrature(p, rep.trajectory);
    // Conserved-quantity drift of the monitors recorded along the run.
    for (const char* key : {"E", "H"}) {
        double v0 = rep.trajectory.nodes.front().monitors.at(key);
        double worst = 0.0;
        for (const auto& n : rep.trajectory.nodes)
            worst = std::max(worst, std::abs(n.monitors.at(key) - v0));
        rep.drifts[key] = worst;
    }
    return rep;
}

double simpson(const std::vector<double>& samples, double h) {
    const int n = static_cast<int>(samples.size()) - 1;  // interval count
    if (n < 1) return 0.0;
    if (n == 1) return 0.5 * h * (samples[0] + samples[1]);
    double total = 0.0;
    int even_end = (n % 2 == 0) ? n : n - 3;
    for (int i = 0; i + 2 <= even_end; i += 2)
        total += (h / 3.0) * (samples[i] + 4.0 * samples[i + 1] + samples[i + 2]);
    if (n % 2 != 0) {
        if (n >= 3) {
            int i = n - 3;
            total += (3.0 * h / 8.0) *
                     (samples[i] + 3.0 * samples[i + 1] + 3.0 * samples[i + 2] + samples[i + 3]);
        } else {
            total += 0.5 * h * (samples[n - 1] + samples[n]);
        }
    }
    return total;
}

namespace {

double mayer_value(const OcpProblem& p, const Vec& q, const Vec& v) {
    if (!p.mayer) return 0.0;
    return p.mayer->value(to_jets(q), to_jets(v)).v;
}

}  // namespace

double cost_quadrature(const OcpProblem& p, const Trajectory& traj) {
    const int d = p.dim_q();
    std::vector<double> c;
    c.reserve(traj.nodes.size());
    Vec qT, vT;
    for (const auto& node : traj.nodes) {
        Vec pm = transport_coords(p, traj.form, Formulation::Pmp, node.coords, node.u);
        Vec q = pm.segment(0, d), v = pm.segment(d, d);
        c.push_back(p.cost.value(to_jets(q), to_jets(v), to_jets(node.u)).v);
        qT = q;
        vT = v;
    }
    return simpson(c, traj.h()) + mayer_value(p, qT, vT);
}

double cost_j2(const OcpProblem& p, const Trajectory& traj) {
    const int d = p.dim_q();
    std::vector<double> c;
    c.reserve(traj.nodes.size());
    Vec qT, vT;
    Vec warm = Vec::Zero(p.dim_u());
    for (const auto& node : traj.nodes) {
        Vec nl = transport_coords(p, traj.form, Formulation::NewLag, node.coords, node.u);
        Vec q = nl.segment(0, d), k = nl.segment(d, d), vq = nl.segment(2 * d, d);
        // qddot from the field minus the dynamics: zero on-shell, evaluated
        // honestly node by node.
        ExtendedState tmp{Formulation::NewLag, node.t, nl};
        Vec rate = field(p, Formulation::NewLag, tmp, warm);
        Vec qddot = rate.segment(2 * d, d);
        JetVec xv = p.sode.accel(to_jets(q), to_jets(vq), to_jets(node.u));
        double ci = p.cost.value(to_jets(q), to_jets(vq), to_jets(node.u)).v;
        for (int i = 0; i < d; ++i) ci += k[i] * (qddot[i] - xv[i].v);
        c.push_back(ci);
        qT = q;
        vT = vq;
    }
    return simpson(c, traj.h()) + mayer_value(p, qT, vT);
}

double cost_j3(const OcpProblem& p, const Trajectory& traj) {
    const int d = p.dim_q();
    std::vector<double> lt;
    lt.reserve(traj.nodes.size());
    double boundary = 0.0;
    Vec qT, vT;
    for (size_t i = 0; i < traj.nodes.size(); ++i) {
        const auto& node = traj.nodes[i];
        Vec nl = transport_coords(p, traj.form, Formulation::NewLag, node.coords, node.u);
        NewLagPoint pt{nl.segment(0, d), nl.segment(d, d), nl.segment(2 * d, d),
                       nl.segment(3 * d, d), node.u};
        lt.push_back(new_lagrangian(p, pt));
        double pairing = pt.k.dot(pt.vq);
        if (i == 0) boundary -= pairing;
        if (i + 1 == traj.nodes.size()) {
            boundary += pairing;
            qT = pt.q;
            vT = pt.vq;
        }
    }
    return mayer_value(p, qT, vT) + boundary - simpson(lt, traj.h());
}

Trajectory identify_trajectory(const Trajectory& traj, Formulation to, const OcpProblem& p) {
    Trajectory out = traj;
    out.form = to;
    for (auto& node : out.nodes)
        node.coords = transport_coords(p, traj.form, to, node.coords, node.u);
    return out;
}

void write_csv(const Trajectory& traj, std::ostream& os) {
    if (traj.nodes.empty()) return;
    const int d = static_cast<int>(traj.nodes.front().coords.size()) / 4;
    const int nu = static_cast<int>(traj.nodes.front().u.size());
    os << "t";
    for (int i = 1; i <= d; ++i) os << ",q_" << i;
    for (int i = 1; i <= d; ++i) os << ",v_" << i;
    for (int i = 1; i <= d; ++i) os << ",adj1_" << i;
    for (int i = 1; i <= d; ++i) os << ",adj2_" << i;
    for (int i = 1; i <= nu; ++i) os << ",u_" << i;
    std::vector<std::string> extra;
    for (const auto& kv : traj.nodes.front().monitors) extra.push_back(kv.first);
    for (const auto& k : extra) os << "," << k;
    os << "\n";

    // Chart block order: (q, v-like, adj1, adj2) columns follow the chart's
    // own labeling: v is the velocity-like block, adj1/adj2 the other two.
    auto layout = [&](const Vec& c, int block) -> Vec {
        switch (traj.form) {
            case Formulation::Pmp: {
                int map[4] = {0, 1, 2, 3};
                return c.segment(map[block] * d, d);
            }
            case Formulation::NewLag:
            case Formulation::Forced: {
                int map[4] = {0, 2, 1, 3};  // v-like is block 2
                return c.segment(map[block] * d, d);
            }
            case Formulation::NewHam: {
                int map[4] = {0, 3, 1, 2};  // v-like is p_kappa
                return c.segment(map[block] * d, d);
            }
        }
        return Vec();
    };

    char buf[64];
    auto emit = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << "," << buf;
    };
    for (const auto& node : traj.nodes) {
        std::snprintf(buf, sizeof buf, "%.17g", node.t);
        os << buf;
        for (int b = 0; b < 4; ++b) {
            Vec v = layout(node.coords, b);
            for (int i = 0; i < d; ++i) emit(v[i]);
        }
        for (int i = 0; i < nu; ++i) emit(node.u[i]);
        for (const auto& k : extra) {
            auto it = node.monitors.find(k);
            emit(it == node.monitors.end() ? 0.0 : it->second);
        }
        os << "\n";
    }
}

}  // namespace socp
