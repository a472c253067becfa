#pragma once

#include "socp/dual.hpp"
#include "socp/jet.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace socp {

using DJ = Dual<Jet>;
using DDJ = Dual<Dual<Jet>>;
using DJVec = std::vector<DJ>;
using DDJVec = std::vector<DDJ>;

/// Scalar function of (q, v) evaluable at three derivative depths: plain
/// jets, duals over jets (one extra derivative level) and doubly nested
/// duals (two extra levels). All three are instantiated from one generic
/// lambda at registration time.
struct StateScalarFn {
    std::function<Jet(const JetVec&, const JetVec&)> jet;
    std::function<DJ(const DJVec&, const DJVec&)> dual;
    std::function<DDJ(const DDJVec&, const DDJVec&)> dual2;

    explicit operator bool() const { return static_cast<bool>(jet); }
};

template <class F>
StateScalarFn make_state_scalar(F f) {
    return StateScalarFn{f, f, f};
}

using SodeFn = std::function<JetVec(const JetVec& q, const JetVec& v, const JetVec& u)>;
using CostFn = std::function<Jet(const JetVec& q, const JetVec& v, const JetVec& u)>;
using MayerFn = std::function<Jet(const JetVec& q, const JetVec& v)>;
using ForceFn = std::function<JetVec(const JetVec& q, const JetVec& v, const JetVec& u)>;

struct ControlledSode {
    int dim_q = 0;
    int dim_u = 0;
    SodeFn accel;  // X_v(q, v, u), length dim_q
};

struct RunningCost {
    CostFn value;
};

struct TerminalCost {
    MayerFn value;
};

struct ForceControlledLagrangian {
    StateScalarFn lagrangian;  // L(q, v)
    ForceFn force;             // f_L(q, v, u), covector components on Q
};

enum class TerminalMode { Fixed, Free };

struct BoundarySpec {
    double T = 1.0;
    Vec q0, v0;
    TerminalMode mode = TerminalMode::Fixed;
    Vec qT, vT;  // used in Fixed mode
};

/// Uniform sampling box for property suites and rank tests.
struct SampleBox {
    Vec q_lo, q_hi;
    Vec v_lo, v_hi;
    Vec u_lo, u_hi;
    Vec adj_lo, adj_hi;  // per-q-component costate range
};

struct OcpProblem {
    std::string name;
    ControlledSode sode;
    RunningCost cost;
    std::optional<TerminalCost> mayer;
    std::optional<ForceControlledLagrangian> lagrangian;
    BoundarySpec boundary;
    std::map<std::string, double> params;
    SampleBox box;
    // Indices of the directly actuated acceleration equations for the
    // underactuated higher-order path; empty means all equations.
    std::vector<int> actuated_indices;
    // User-asserted global fiber-diffeomorphism flag for the regularity
    // classifier's hyperregular verdict.
    bool hyperregular_assertion = false;

    int dim_q() const { return sode.dim_q; }
    int dim_u() const { return sode.dim_u; }
};

/// Expands the forced Euler-Lagrange equations of sys into an explicit
/// controlled SODE: X_v = (D22 L)^-1 (D1 L + f_L - D12 L v). Throws EvalError
/// with a condition estimate when the velocity Hessian is singular at an
/// evaluation point.
ControlledSode sode_from_lagrangian(const ForceControlledLagrangian& sys, int dim_q, int dim_u);

enum class Actuation { Full, Under };

std::vector<Vec> sample_box_points(const SampleBox& box, int count, std::uint64_t seed);

/// Rank test of D3 X_v at the given (q, v, u) samples; full actuation iff the
/// rank equals dim_q at every sample (SVD threshold 1e-10 * sigma_max).
Actuation actuation_classify(const OcpProblem& p, const std::vector<Vec>& samples);
Actuation actuation_classify(const OcpProblem& p, int n_samples = 100, std::uint64_t seed = 42);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Diagnostics {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Dimension consistency, Lagrangian/SODE agreement and smoothness spot
/// checks at seeded random points. Collects failures instead of throwing.
Diagnostics validate_problem(const OcpProblem& p, std::uint64_t seed = 42);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Plain-text key=value problem configuration. Unknown keys are errors.
struct ProblemConfig {
    std::string problem;
    std::optional<double> T;
    std::optional<int> N;
    std::optional<Vec> q0, v0, qT, vT;
    std::optional<TerminalMode> terminal_mode;
    std::map<std::string, double> params;
    std::optional<double> tol_newton;
    std::optional<double> tol_shoot;
};

ProblemConfig parse_problem_config(const std::string& text);
ProblemConfig load_problem_config(const std::string& path);

/// Applies boundary/param overrides from a config to a registry problem.
void apply_config(OcpProblem& p, const ProblemConfig& cfg);

}  // namespace socp
