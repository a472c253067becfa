#pragma once

#include "socp/formulations.hpp"

namespace socp {

/// The double-bundle charts used throughout. Every map checks its input tag;
/// the content of this module is exactly about not confusing these spaces.
enum class Chart {
    PmpE,          // T*TQ  (+) E          : (q, v, lambda_q, lambda_v, u)
    NewLagE,       // TT*Q  (+)_alpha E    : (q, kappa, v_q, v_kappa, u)
    NewHamE,       // T*T*Q (+)_beta E     : (q, kappa, p_q, p_kappa, u)
    TangentE,      // TTQ   (+)_kappa E    : (q, xi, v_q, v_xi, u)
    ForcedImage,   // T*TQ  (+)_{alpha,L} E: (q, xi, w_q, w_xi, u)
    TangentHamF,   // TT*Q  (+) F          : (q, p, v_q, v_p, w)
    HamPmpF,       // T*T*Q (+) F          : (q, p, lambda_q, lambda_p, w)
    AlphaTildeF,   // T*TQ  (+)~alpha F    : (q, xi, w_q, w_xi, w)
};

const char* to_string(Chart c);

struct ChartError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A point of one of the twisted sums: four base blocks of size dim_q plus
/// the control block.
struct TwistedPoint {
    Chart chart = Chart::NewLagE;
    int dim_q = 0;
    int dim_u = 0;
    Vec coords;  // length 4 dim_q + dim_u

    TwistedPoint() = default;
    TwistedPoint(Chart c, int dq, int du) : chart(c), dim_q(dq), dim_u(du) {
        coords = Vec::Zero(4 * dq + du);
    }
    TwistedPoint(Chart c, const Vec& b0, const Vec& b1, const Vec& b2, const Vec& b3, const Vec& u);

    Vec block(int i) const;           // i in 0..3
    void set_block(int i, const Vec& v);
    Vec control() const;
    void set_control(const Vec& u);
    void require(Chart c) const;
};

TwistedPoint from_pmp(const OcpProblem& p, const PmpPoint& pt);
TwistedPoint from_newlag(const OcpProblem& p, const NewLagPoint& pt);
TwistedPoint from_newham(const OcpProblem& p, const NewHamPoint& pt);
TwistedPoint from_forced(const OcpProblem& p, const ForcedPoint& pt);
TwistedPoint from_forced_image(const OcpProblem& p, const ForcedImagePoint& pt);
PmpPoint to_pmp(const TwistedPoint& pt);
NewLagPoint to_newlag(const TwistedPoint& pt);
NewHamPoint to_newham(const TwistedPoint& pt);
ForcedPoint to_forced(const TwistedPoint& pt);
ForcedImagePoint to_forced_image(const TwistedPoint& pt);

// The extended Tulczyjew maps: pure coordinate rearrangements that carry the
// control block unchanged.

TwistedPoint alpha_map(const TwistedPoint& pt);          // NewLagE -> PmpE
TwistedPoint alpha_inverse(const TwistedPoint& pt);      // PmpE -> NewLagE
TwistedPoint beta_map(const TwistedPoint& pt);           // NewLagE -> NewHamE
TwistedPoint beta_inverse(const TwistedPoint& pt);       // NewHamE -> NewLagE
TwistedPoint kappa_map(const TwistedPoint& pt);          // TangentE -> TangentE (middle swap)

/// Musical isomorphisms induced by a regular force-controlled Lagrangian:
/// flat maps the kappa-twisted tangent chart into the PMP chart fiber,
/// sharp is its exact inverse.
TwistedPoint musical_flat(const OcpProblem& p, const TwistedPoint& pt);   // TangentE -> PmpE
TwistedPoint musical_sharp(const OcpProblem& p, const TwistedPoint& pt);  // PmpE -> TangentE

/// Partial cotangent lift to the Pontryagin chart of the induced forced
/// Hamiltonian system, with the simple control lift:
/// (q, xi, w_q, w_xi, u) -> (q, p = w_xi, lambda_q = -w_q, lambda_p = xi, u).
TwistedPoint chi_tilde1(const OcpProblem& p, const TwistedPoint& pt);  // ForcedImage -> HamPmpF

/// Constant presymplectic matrices in chart coordinate order, with zero
/// rows/columns for the control block. Supported charts: PmpE, NewLagE,
/// NewHamE.
struct TwoForm {
    Mat matrix;  // (4 dim_q + dim_u)^2, antisymmetric
};
TwoForm presymplectic_form(Chart chart, int dim_q, int dim_u);

/// Residual of i_X omega = dH restricted to the non-control coordinates:
/// max |omega^T field - dH| over the first 4 dim_q entries.
double geometric_residual(const TwoForm& form, const Vec& field, const Vec& dH);

/// Central-difference Jacobian of a coordinate map, used by the pullback
/// checks (exact for the permutation maps).
Mat map_jacobian_fd(const std::function<Vec(const Vec&)>& f, const Vec& x, double step = 1e-6);

/// Random chart points inside the problem's sample box (adjoint-like blocks
/// drawn from the adjoint range).
std::vector<TwistedPoint> sample_chart_points(const OcpProblem& p, Chart chart, int count,
                                              std::uint64_t seed);

}  // namespace socp
