#pragma once

#include "socp/actions.hpp"
#include "socp/shooting.hpp"

namespace socp {

struct MonitorSeries {
    std::string name;
    std::vector<double> values;
    double drift() const {
        if (values.empty()) return 0.0;
        double worst = 0.0;
        for (double v : values) worst = std::max(worst, std::abs(v - values.front()));
        return worst;
    }
};

MonitorSeries energy_monitor(const Trajectory& traj, const OcpProblem& p);
MonitorSeries pontryagin_monitor(const Trajectory& traj, const OcpProblem& p);

struct NoetherSeries {
    MonitorSeries series;
    bool symmetric = true;         // invariance spot check of the OCP data
    double symmetry_residual = 0;  // worst invariance residual found
};

/// Momentum pairing of the costates with the lifted generator along the
/// trace. Emits a warning flag instead of failing when the OCP is not
/// symmetric under the action.
NoetherSeries noether_pmp(const Trajectory& traj, const OneParamAction& a, const OcpProblem& p);

/// Same first integral expressed through the new-Lagrangian variables; equal
/// to the PMP momentum pointwise under the costate identification.
NoetherSeries noether_newlag(const Trajectory& traj, const OneParamAction& a, const OcpProblem& p);

/// Hamiltonian-side expression through the fiber derivative image.
NoetherSeries noether_newham(const Trajectory& traj, const OneParamAction& a, const OcpProblem& p);

struct MechanicalNoether {
    MonitorSeries I_L;        // D2 L . X^Q(q)
    MonitorSeries I_Ltilde;   // w_q . X^Q + w_xi . DX^Q xi
    std::vector<double> dIL_dt;          // flow derivative of I_L per node
    std::vector<double> force_pairing;   // f_L . X^Q per node
    bool orthogonal = true;   // force orthogonality within tolerance
    double orthogonality_residual = 0.0;
};

/// Mechanical momentum monitors of the underlying forced Lagrangian system;
/// warns (orthogonal = false) when the force pairing with the generator is
/// nonzero, in which case I_L is expected to drift.
MechanicalNoether noether_mechanical(const Trajectory& traj, const OneParamAction& a,
                                     const OcpProblem& p);

struct GeneratingChecks {
    std::vector<CheckResult> identities;
    double worst_derivative_residual = 0.0;  // FD-limited identities
    double mixed_relation_residual = 0.0;    // algebraic quadrature identity
    bool all_pass = true;
};

/// Derivative identities of the boundary-value generating functions over an
/// interior window [a_frac, b_frac] * T. Each identity compares an analytic
/// costate value against a central difference over re-solved neighboring
/// boundary problems (endpoint perturbation 1e-4).
GeneratingChecks generating_checks(const OcpProblem& p, Formulation f, double a_frac,
                                   double b_frac, int N, double tol_deriv = 1e-3,
                                   double tol_mixed = 1e-8);

}  // namespace socp
