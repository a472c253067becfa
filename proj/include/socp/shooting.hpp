#pragma once

#include "socp/optimality.hpp"

#include <iosfwd>
#include <map>

namespace socp {

struct TrajectoryNode {
    double t = 0.0;
    Vec coords;  // 4 dim_q chart coordinates
    Vec u;       // eliminated control at the node
    std::map<std::string, double> monitors;
};

struct Trajectory {
    std::string problem;
    Formulation form = Formulation::Pmp;
    double T = 0.0;
    int N = 0;
    std::vector<TrajectoryNode> nodes;  // N + 1 entries on the uniform grid

    double h() const { return T / N; }
};

struct SolverReport {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    double cost = 0.0;  // Mayer + running-cost quadrature on the solution
    Trajectory trajectory;
    Vec initial_unknowns;  // converged shooting unknowns
    std::map<std::string, double> drifts;
    std::uint64_t seed = 42;
};

/// Classical fixed-step RK4 on the extended-state field; controls and the
/// E / H monitors are recorded at the nodes. Throws EvalError with the
/// partial trajectory unavailable if a field evaluation fails mid-run.
Trajectory integrate_ivp(const OcpProblem& p, Formulation f, const ExtendedState& x0, int N);

/// Plain controlled-SODE rollout with a frozen control (state blocks only;
/// adjoints stay zero, PMP chart labeling).
Trajectory integrate_sode(const OcpProblem& p, const Vec& q0, const Vec& v0, const Vec& u_fixed,
                          int N);

/// Eliminates the control at a bare chart point, warm started from u.
void eliminate_node_control(const OcpProblem& p, Formulation f, const Vec& coords, Vec& u);

/// State-adjoint integration in the PMP chart under a prescribed control
/// schedule (no pointwise maximization); used to watch conservation break
/// on non-extremal runs.
Trajectory integrate_pmp_scheduled(const OcpProblem& p, const ExtendedState& x0, int N,
                                   const std::function<Vec(double)>& u_of_t);

/// Builds the initial extended state of a shooting run: boundary (q0, v0)
/// placed chart-appropriately, the 2 dim_q unknown adjoint coordinates from
/// the guess.
ExtendedState shooting_initial_state(const OcpProblem& p, Formulation f, const Vec& guess);

/// Integrates from the guess and returns the terminal residual (endpoint
/// mismatch in fixed mode, transversality in free mode).
Vec shoot(const OcpProblem& p, Formulation f, const Vec& guess, int N);

/// Damped Newton on the shooting map with central finite-difference
/// Jacobian, step 1e-6 (1 + |guess|).
SolverReport solve_bvp(const OcpProblem& p, Formulation f, const Vec& guess, int N, double tol);

/// Generic small dense Newton used by the shooting layers: F must map R^n to
/// R^n. Returns the iterate; sets converged/iterations/residual.
struct NewtonResult {
    Vec x;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};
NewtonResult newton_solve(const std::function<Vec(const Vec&)>& F, const Vec& x0, double tol,
                          int max_iter = 50);

/// Composite Simpson quadrature of per-node samples (3/8 rule on the tail
/// when the interval count is odd).
double simpson(const std::vector<double>& samples, double h);

/// Running + Mayer cost of a solved trajectory (the J-tilde-1 value).
double cost_quadrature(const OcpProblem& p, const Trajectory& traj);
/// Same objective evaluated through the implicit second-order form (the
/// constraint term is re-evaluated from the dynamics residual at each node).
double cost_j2(const OcpProblem& p, const Trajectory& traj);
/// Integrated-by-parts objective: Mayer + boundary pairing - integral of the
/// new control Lagrangian.
double cost_j3(const OcpProblem& p, const Trajectory& traj);

/// Pointwise identification of a whole trajectory into another chart.
Trajectory identify_trajectory(const Trajectory& traj, Formulation to, const OcpProblem& p);

/// CSV trace: header t, q_i, v_i, adj1_i, adj2_i, u_j, E, H, then any extra
/// monitor columns; 17 significant digits.
void write_csv(const Trajectory& traj, std::ostream& os);

}  // namespace socp
