#include "socp/registry.hpp"

namespace socp {

namespace {

double param(const std::map<std::string, double>& params, const std::string& key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
}

Vec vec1(double a) {
    Vec v(1);
    v << a;
    return v;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// q ~ [lo, hi] boxes per problem; adjoint ranges keep the property suites
// away from excluded loci (lambda = 0 for the scalar examples).
SampleBox box1(double qlo, double qhi, double vlo, double vhi, double ulo, double uhi,
               double alo, double ahi) {
    SampleBox b;
    b.q_lo = vec1(qlo);
    b.q_hi = vec1(qhi);
    b.v_lo = vec1(vlo);
    b.v_hi = vec1(vhi);
    b.u_lo = vec1(ulo);
    b.u_hi = vec1(uhi);
    b.adj_lo = vec1(alo);
    b.adj_hi = vec1(ahi);
    return b;
}

OcpProblem make_double_integrator(const std::map<std::string, double>& params) {
    OcpProblem p;
    p.name = "double_integrator";
    p.params = params;
    p.sode.dim_q = 1;
    p.sode.dim_u = 1;
    p.sode.accel = [](const JetVec&, const JetVec&, const JetVec& u) { return JetVec{u[0]}; };
    p.cost.value = [](const JetVec&, const JetVec&, const JetVec& u) { return 0.5 * u[0] * u[0]; };
    ForceControlledLagrangian lag;
    lag.lagrangian = make_state_scalar(
        [](const auto& q, const auto& v) { return 0.5 * v[0] * v[0] + 0.0 * q[0]; });
    lag.force = [](const JetVec&, const JetVec&, const JetVec& u) { return JetVec{u[0]}; };
    p.lagrangian = lag;
    p.boundary.T = 1.0;
    p.boundary.q0 = vec1(0.0);
    p.boundary.v0 = vec1(0.0);
    p.boundary.mode = TerminalMode::Fixed;
    p.boundary.qT = vec1(1.0);
    p.boundary.vT = vec1(0.0);
    p.box = box1(-1.0, 2.0, -2.0, 2.0, -6.0, 6.0, -12.0, 12.0);
    p.actuated_indices = {0};
    return p;
}

OcpProblem make_low_thrust(const std::map<std::string, double>& params) {
    const double m = param(params, "m", 1.0);
    const double gM = param(params, "gammaM", 1.0);
    constexpr double r_min = 1e-6;
    OcpProblem p;
    p.name = "low_thrust";
    p.params = {{"m", m}, {"gammaM", gM}};
    p.sode.dim_q = 2;
    p.sode.dim_u = 1;
    p.sode.accel = [gM](const JetVec& q, const JetVec& v, const JetVec& u) -> JetVec {
        if (q[0].v <= r_min) throw EvalError("low_thrust: r below r_min");
        const Jet& r = q[0];
        return JetVec{r * v[1] * v[1] - gM / (r * r), -2.0 * v[0] * v[1] / r + u[0] / r};
    };
    p.cost.value = [](const JetVec&, const JetVec&, const JetVec& u) { return 0.5 * u[0] * u[0]; };
    ForceControlledLagrangian lag;
    lag.lagrangian = make_state_scalar([m, gM](const auto& q, const auto& v) {
        return 0.5 * m * (v[0] * v[0] + q[0] * q[0] * v[1] * v[1]) + gM * m / q[0];
    });
    lag.force = [m](const JetVec& q, const JetVec&, const JetVec& u) -> JetVec {
        if (q[0].v <= r_min) throw EvalError("low_thrust: r below r_min");
        return JetVec{Jet(0.0), m * q[0] * u[0]};
    };
    p.lagrangian = lag;
    p.boundary.T = 1.0;
    p.boundary.q0 = vec2(1.0, 0.0);
    p.boundary.v0 = vec2(0.0, 1.0);
    p.boundary.mode = TerminalMode::Fixed;
    // Endpoint a small thrust away from the circular-orbit continuation.
    p.boundary.qT = vec2(1.02, 1.05);
    p.boundary.vT = vec2(0.02, 0.95);
    p.box.q_lo = vec2(0.8, -0.5);
    p.box.q_hi = vec2(1.3, 0.5);
    p.box.v_lo = vec2(-0.3, 0.7);
    p.box.v_hi = vec2(0.3, 1.2);
    p.box.u_lo = vec1(-1.0);
    p.box.u_hi = vec1(1.0);
    p.box.adj_lo = vec2(-1.0, -1.0);
    p.box.adj_hi = vec2(1.0, 1.0);
    p.actuated_indices = {1};  // only the angular equation carries the thrust
    return p;
}

OcpProblem make_rot_oscillator(const std::map<std::string, double>& params) {
    const double omega = param(params, "omega", 1.0);
    constexpr double q_min = 1e-6;
    OcpProblem p;
    p.name = "rot_oscillator";
    p.params = {{"omega", omega}};
    p.sode.dim_q = 2;
    p.sode.dim_u = 1;
    // Radial thrust: the force u q/|q| is orthogonal to the rotation
    // generator, so the mechanical angular momentum stays conserved.
    p.sode.accel = [omega](const JetVec& q, const JetVec&, const JetVec& u) -> JetVec {
        Jet n2 = q[0] * q[0] + q[1] * q[1];
        if (n2.v <= q_min * q_min) throw EvalError("rot_oscillator: |q| below q_min");
        Jet n = sqrt(n2);
        return JetVec{-omega * omega * q[0] + u[0] * q[0] / n,
                      -omega * omega * q[1] + u[0] * q[1] / n};
    };
    p.cost.value = [](const JetVec&, const JetVec&, const JetVec& u) { return 0.5 * u[0] * u[0]; };
    ForceControlledLagrangian lag;
    lag.lagrangian = make_state_scalar([omega](const auto& q, const auto& v) {
        return 0.5 * (v[0] * v[0] + v[1] * v[1]) -
               0.5 * omega * omega * (q[0] * q[0] + q[1] * q[1]);
    });
    lag.force = [](const JetVec& q, const JetVec&, const JetVec& u) -> JetVec {
        Jet n2 = q[0] * q[0] + q[1] * q[1];
        if (n2.v <= q_min * q_min) throw EvalError("rot_oscillator: |q| below q_min");
        Jet n = sqrt(n2);
        return JetVec{u[0] * q[0] / n, u[0] * q[1] / n};
    };
    p.lagrangian = lag;
    p.boundary.T = 1.0;
    p.boundary.q0 = vec2(1.0, 0.0);
    p.boundary.v0 = vec2(0.0, 0.5);
    p.boundary.mode = TerminalMode::Fixed;
    p.boundary.qT = vec2(0.56, 0.40);
    p.boundary.vT = vec2(-0.85, 0.29);
    p.box.q_lo = vec2(0.4, 0.2);
    p.box.q_hi = vec2(1.2, 0.9);
    p.box.v_lo = vec2(-1.0, -1.0);
    p.box.v_hi = vec2(1.0, 1.0);
    p.box.u_lo = vec1(-1.0);
    p.box.u_hi = vec1(1.0);
    p.box.adj_lo = vec2(-1.0, -1.0);
    p.box.adj_hi = vec2(1.0, 1.0);
    return p;
}

// The three scalar regularity examples as one-dof controlled SODEs.

OcpProblem scalar_base(const std::string& name) {
    OcpProblem p;
    p.name = name;
    p.sode.dim_q = 1;
    p.sode.dim_u = 1;
    p.boundary.T = 1.0;
    p.boundary.q0 = vec1(0.0);
    p.boundary.v0 = vec1(0.0);
    p.boundary.mode = TerminalMode::Free;
    // Adjoint samples keep away from lambda = 0 where the classifications
    // degenerate.
    p.box = box1(-1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 0.3, 1.5);
    return p;
}

OcpProblem make_scalar_singular() {
    OcpProblem p = scalar_base("scalar_singular");
    p.cost.value = [](const JetVec& q, const JetVec& v, const JetVec& u) {
        return 0.5 * (q[0] * q[0] + v[0] * v[0]) + (1.0 + 0.5 * q[0] * q[0]) * u[0];
    };
    p.sode.accel = [](const JetVec& q, const JetVec&, const JetVec& u) {
        return JetVec{(2.0 + sin(q[0])) * u[0]};
    };
    return p;
}

OcpProblem make_scalar_regular() {
    OcpProblem p = scalar_base("scalar_regular");
    p.cost.value = [](const JetVec& q, const JetVec&, const JetVec& u) {
        return (1.0 + 0.5 * q[0] * q[0]) * u[0];
    };
    p.sode.accel = [](const JetVec& q, const JetVec& v, const JetVec& u) {
        return JetVec{(1.0 + v[0] * v[0]) * u[0] + (2.0 + cos(q[0])) * u[0] * u[0]};
    };
    return p;
}

OcpProblem make_scalar_superregular() {
    OcpProblem p = scalar_base("scalar_superregular");
    p.cost.value = [](const JetVec& q, const JetVec&, const JetVec& u) {
        return (2.0 + tanh(q[0])) * u[0] * u[0];
    };
    p.sode.accel = [](const JetVec& q, const JetVec&, const JetVec& u) {
        return JetVec{(1.0 + 0.5 * cos(q[0])) * u[0]};
    };
    return p;
}

}  // namespace

std::vector<std::string> registry_problem_names() {
    return {"double_integrator", "low_thrust",        "scalar_singular",
            "scalar_regular",    "scalar_superregular", "rot_oscillator"};
}

std::vector<std::string> registry_action_names() {
    return {"rotation", "phi_translation", "poly_flow"};
}

std::vector<std::string> registry_formulation_names() {
    return {"pmp", "newlag", "newham", "forced"};
}

OcpProblem make_problem(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "double_integrator") return make_double_integrator(params);
    if (name == "low_thrust") return make_low_thrust(params);
    if (name == "rot_oscillator") return make_rot_oscillator(params);
    if (name == "scalar_singular") return make_scalar_singular();
    if (name == "scalar_regular") return make_scalar_regular();
    if (name == "scalar_superregular") return make_scalar_superregular();
    throw ConfigError("unknown problem '" + name + "'");
}

OneParamAction make_action(const std::string& name, int dim_q) {
    OneParamAction a;
    a.name = name;
    if (name == "rotation") {
        a.dim_q = 2;
        a.phi = [](double s, const JetVec& q) -> JetVec {
            double c = std::cos(s), sn = std::sin(s);
            return JetVec{c * q[0] - sn * q[1], sn * q[0] + c * q[1]};
        };
        a.dphi = [](double s, const JetVec& q) -> JetMat {
            (void)q;
            double c = std::cos(s), sn = std::sin(s);
            return JetMat{{Jet(c), Jet(-sn)}, {Jet(sn), Jet(c)}};
        };
        a.generator_analytic = [](const JetVec& q) -> JetVec { return JetVec{-q[1], q[0]}; };
        return a;
    }
    if (name == "phi_translation") {
        a.dim_q = 2;
        a.phi = [](double s, const JetVec& q) -> JetVec { return JetVec{q[0], q[1] + s}; };
        a.dphi = [](double, const JetVec&) -> JetMat {
            return JetMat{{Jet(1.0), Jet(0.0)}, {Jet(0.0), Jet(1.0)}};
        };
        a.generator_analytic = [](const JetVec& q) -> JetVec {
            return JetVec{0.0 * q[0], 0.0 * q[0] + 1.0};
        };
        return a;
    }
    if (name == "poly_flow") {
        // Componentwise flow of q^2 d/dq: an exact one-parameter group that
        // looks like q + s q^2 near s = 0.
        a.dim_q = dim_q;
        a.phi = [](double s, const JetVec& q) -> JetVec {
            JetVec r(q.size());
            for (size_t i = 0; i < q.size(); ++i) {
                Jet denom = 1.0 - s * q[i];
                if (std::abs(denom.v) < 1e-8) throw EvalError("poly_flow: outside domain");
                r[i] = q[i] / denom;
            }
            return r;
        };
        a.dphi = [dim_q](double s, const JetVec& q) -> JetMat {
            JetMat J(dim_q, JetVec(dim_q, Jet(0.0)));
            for (int i = 0; i < dim_q; ++i) {
                Jet denom = 1.0 - s * q[i];
                J[i][i] = 1.0 / (denom * denom);
            }
            return J;
        };
        a.generator_analytic = [](const JetVec& q) -> JetVec {
            JetVec r(q.size());
            for (size_t i = 0; i < q.size(); ++i) r[i] = q[i] * q[i];
            return r;
        };
        return a;
    }
    throw ConfigError("unknown action '" + name + "'");
}

}  // namespace socp
