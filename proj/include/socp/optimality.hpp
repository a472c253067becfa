#pragma once

#include "socp/tulczyjew.hpp"

namespace socp {

enum class Formulation { Pmp, NewLag, NewHam, Forced };

const char* to_string(Formulation f);
Formulation formulation_from_string(const std::string& s);
Chart chart_of(Formulation f);

/// Extended state in the chart of a formulation with the control eliminated:
/// four blocks of dim_q coordinates.
struct ExtendedState {
    Formulation form = Formulation::Pmp;
    double t = 0.0;
    Vec coords;  // 4 dim_q
};

struct ControlSolve {
    enum class Status { Ok, SingularControl, RegularityViolation };
    Vec u;
    Status status = Status::Ok;
    double residual = 0.0;
    bool hessian_definite = false;  // right-signed definiteness for the chart
    bool ok() const { return status == Status::Ok; }
};

/// The scalar whose u-stationarity defines the control in each chart, as a
/// jet expression over (coords, u).
Jet formulation_scalar(const OcpProblem& p, Formulation f, const JetVec& coords, const JetVec& u);

/// Damped Newton on D_u of the formulation scalar from u0; residual pinned
/// at |D_u|_inf <= 1e-12. Tries alternate starts and keeps a right-definite
/// root when several stationary controls exist.
ControlSolve solve_max_condition(const OcpProblem& p, Formulation f, const Vec& coords,
                                 const Vec& u0, bool multi_start = true);

/// Time derivative of the extended state; u is eliminated pointwise, warm
/// started from u_warm which is updated in place.
Vec field(const OcpProblem& p, Formulation f, const ExtendedState& state, Vec& u_warm);

/// The alpha-transported Pontryagin field on the NewLag chart, exposed for
/// the structural comparison with the Euler-Lagrange field: its second block
/// is not the time derivative of kappa.
Vec field_alpha(const OcpProblem& p, const Vec& coords, const Vec& u);

/// Chart transport of a point at an explicitly given control; trajectories
/// map to trajectories when u satisfies the maximization condition.
Vec transport_coords(const OcpProblem& p, Formulation from, Formulation to, const Vec& coords,
                     const Vec& u);

/// Coordinate transport between formulations so that trajectories map to
/// trajectories (dynamic identifications use the eliminated control).
ExtendedState identify(const ExtendedState& state, Formulation to, const OcpProblem& p);

struct TransversalityReport {
    Vec residual;                   // the asserted conditions
    double displayed_gap = -1.0;    // gap of the second-order displayed
                                    // variant, reported, never asserted
};

/// Residual of the terminal conditions at the given terminal state: fixed
/// mode returns the endpoint mismatch, free mode the costate conditions.
TransversalityReport transversality_residual(const OcpProblem& p, const ExtendedState& terminal,
                                             Formulation f);

}  // namespace socp
