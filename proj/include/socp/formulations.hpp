#pragma once

#include "socp/problem.hpp"

#include <cstdint>

namespace socp {

// Adapted-coordinate records for the four charts the solver works in.

struct PmpPoint {  // T*TQ (+) E : (q, v, lambda_q, lambda_v, u)
    Vec q, v, lq, lv, u;
};

struct NewLagPoint {  // TT*Q (+)_alpha E : (q, kappa, v_q, v_kappa, u)
    Vec q, k, vq, vk, u;
};

struct NewHamPoint {  // T*T*Q (+)_beta E : (q, kappa, p_q, p_kappa, u)
    Vec q, k, pq, pk, u;
};

struct ForcedPoint {  // TTQ (+)_kappa E : (q, xi, v_q, v_xi, u)
    Vec q, xi, vq, vxi, u;
};

struct ForcedImagePoint {  // T*TQ (+)_{alpha,L} E : (q, xi, w_q, w_xi, u)
    Vec q, xi, wq, wxi, u;
};

struct NotInvertibleError : EvalError {
    using EvalError::EvalError;
};

struct UnsupportedFormulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Jet-level scalar functions. These are the working definitions; the double
// overloads below are thin wrappers.

Jet pontryagin_h_jet(const OcpProblem& p, const JetVec& q, const JetVec& v, const JetVec& lq,
                     const JetVec& lv, const JetVec& u);
Jet new_lagrangian_jet(const OcpProblem& p, const JetVec& q, const JetVec& k, const JetVec& vq,
                       const JetVec& vk, const JetVec& u);
Jet new_hamiltonian_jet(const OcpProblem& p, const JetVec& q, const JetVec& k, const JetVec& pq,
                        const JetVec& pk, const JetVec& u);
Jet forced_new_lagrangian_jet(const OcpProblem& p, const JetVec& q, const JetVec& xi,
                              const JetVec& vq, const JetVec& vxi, const JetVec& u);

double pontryagin_h(const OcpProblem& p, const PmpPoint& pt);
double new_lagrangian(const OcpProblem& p, const NewLagPoint& pt);
double new_hamiltonian(const OcpProblem& p, const NewHamPoint& pt);
double forced_new_lagrangian(const OcpProblem& p, const ForcedPoint& pt);

/// Energy of the new control Lagrangian, E = D3 Lt . v_q + D4 Lt . v_k - Lt,
/// evaluated through jets.
double new_energy(const OcpProblem& p, const NewLagPoint& pt);

/// Fiber derivative of the new control Lagrangian and its exact inverse
/// (affine in the velocities, no iteration needed).
NewHamPoint fiber_derivative_newlag(const OcpProblem& p, const NewLagPoint& pt);
NewLagPoint fiber_derivative_newlag_inverse(const OcpProblem& p, const NewHamPoint& pt);

/// First derivatives of L at (q, v) as jets (one nested dual level).
void lagrangian_gradient(const ForceControlledLagrangian& sys, const JetVec& q, const JetVec& v,
                         JetVec& d1, JetVec& d2);

/// Full second-order data of L at (q, v) as jets (two nested dual levels).
struct LagrangianHessian {
    JetVec d1, d2;                       // gradients
    std::vector<JetVec> hqq, hqv, hvq, hvv;  // d x d jet blocks
};
LagrangianHessian lagrangian_hessian(const ForceControlledLagrangian& sys, const JetVec& q,
                                     const JetVec& v);

/// Fiber derivative of the forced new control Lagrangian:
/// w_q = D22 L v_xi + [D12 L + D2 fL] xi - D2 C, w_xi = D2 L.
ForcedImagePoint forced_fiber_derivative(const OcpProblem& p, const ForcedPoint& pt);
ForcedPoint forced_fiber_derivative_inverse(const OcpProblem& p, const ForcedImagePoint& pt);

/// Solves D2 L(q, v) = pq for v by damped Newton (tol 1e-12, 50 iterations).
Vec legendre_velocity(const ForceControlledLagrangian& sys, const Vec& q, const Vec& pq,
                      const Vec& v_guess);

double forced_new_hamiltonian(const OcpProblem& p, const ForcedImagePoint& pt);

/// Force-controlled Hamiltonian system induced by the simple control lift
/// chi(q, v, u) = (q, D2 L(q, v), u). Jet callables support first-order
/// seeds; second derivatives of H are produced internally.
struct ForcedHamSystem {
    int dim_q = 0;
    int dim_u = 0;
    std::function<Jet(const JetVec& q, const JetVec& pq)> H;
    CostFn CH;   // C_H(q, p, u)
    ForceFn fH;  // f_H(q, p, u)
    std::function<Jet(const JetVec& q, const JetVec& pq, const JetVec& lq, const JetVec& lp,
                      const JetVec& u)>
        h_minus1;
    // Forced Hamilton field (D2 H, -D1 H + f_H) at values.
    std::function<Vec(const Vec& q, const Vec& pq, const Vec& u)> field;
};
ForcedHamSystem build_forced_hamiltonian(const OcpProblem& p);

/// Determinant statistics of the blocked velocity Hessian of the new control
/// Lagrangian over sampled points and controls.
struct HyperregCertificate {
    double abs_det = 0.0;
    int sign = 0;
    bool unit_modulus = false;       // |det| == 1 within 1e-12
    bool point_independent = false;  // identical after rounding at 1e-12
    int paper_sign = 0;              // (-1)^(dim_q - 1)
    bool sign_matches_paper = false;
    std::vector<double> dets;
};
HyperregCertificate hyperregularity_certificate(const OcpProblem& p, int n_samples = 100,
                                                std::uint64_t seed = 42);

/// Higher-order Lagrangian of a fully actuated problem: value C(q, v, u*)
/// with u* solving X_v(q, v, u) = a, plus the acceleration gradient D3.
struct HigherOrderEval {
    double value = 0.0;
    Vec d3;      // gradient w.r.t. a
    Vec u_star;  // recovered control
};
HigherOrderEval higher_order_lagrangian(const OcpProblem& p, const Vec& q, const Vec& v,
                                        const Vec& a);

/// Augmented variant for underactuated problems with an actuation-adapted
/// coordinate split: the non-actuated equations are attached as constraints.
double augmented_higher_order_lagrangian(const OcpProblem& p, const Vec& q, const Vec& v,
                                         const Vec& a, const Vec& mult);

enum class RegularityClass { Singular, Regular, Superregular, HyperregularCandidate };

const char* to_string(RegularityClass c);

/// Pointwise rank classification of the smooth maximization condition over
/// seeded samples (SVD threshold 1e-10 * sigma_max).
RegularityClass classify_ocp_regularity(const OcpProblem& p, int n_samples = 100,
                                        std::uint64_t seed = 42);

/// Order-2 derivative data of a scalar f(x, u) after eliminating u through
/// D_u f = 0 at the given stationary control: value, gradient and Hessian
/// w.r.t. x alone (Schur complement in u), plus du*/dx.
struct EliminatedScalar {
    double value = 0.0;
    Vec grad;
    Mat hess;
    Mat du_dx;
};
EliminatedScalar eliminate_control(const FlatFn& f, int nx, int nu, const Vec& x, const Vec& u);

}  // namespace socp
