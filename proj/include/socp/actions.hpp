#pragma once

#include "socp/tulczyjew.hpp"

namespace socp {

using JetMat = std::vector<JetVec>;  // row-major matrix of jets

/// One-parameter group action on Q with analytic Jacobian. Second derivatives
/// of phi come from jets on dphi, which the double-bundle lifts need. psi is
/// the (linear) action on the control fiber; empty means identity.
struct OneParamAction {
    std::string name;
    int dim_q = 0;
    std::function<JetVec(double s, const JetVec& q)> phi;
    std::function<JetMat(double s, const JetVec& q)> dphi;
    std::function<JetVec(const JetVec& q)> generator_analytic;  // optional
    std::function<Mat(double s, const Vec& q, const Vec& v)> psi;  // optional

    Vec apply(double s, const Vec& q) const;
    Mat jacobian(double s, const Vec& q) const;
    Mat control_map(double s, const Vec& q, const Vec& v) const;
};

struct Generator {
    std::function<JetVec(const JetVec& q)> XQ;
    Vec operator()(const Vec& q) const;
};

/// Validates phi(0,.) = id and the group property on sample points.
Diagnostics validate_action(const OneParamAction& a, const std::vector<Vec>& q_samples);

/// Tangent lift: (q, v) -> (phi_s(q), Dphi_s(q) v).
void lift_tangent(const OneParamAction& a, double s, const Vec& q, const Vec& v, Vec& q_out,
                  Vec& v_out);

/// Cotangent lift: (q, lambda) -> (phi_s(q), (Dphi_s(q))^-T lambda).
void lift_cotangent(const OneParamAction& a, double s, const Vec& q, const Vec& lambda, Vec& q_out,
                    Vec& lambda_out);

/// Lift to the double-bundle charts PmpE (T*TQ), NewLagE (TT*Q) and NewHamE
/// (T*T*Q), including the second-derivative correction terms. The control
/// block transforms by psi at the underlying TQ base point.
TwistedPoint lift_double(const OneParamAction& a, double s, const TwistedPoint& pt);

/// max_s |fn(lifted pt) - fn(pt)| over the s grid.
double invariance_residual(const std::function<double(const TwistedPoint&)>& fn,
                           const OneParamAction& a, const TwistedPoint& pt,
                           const std::vector<double>& s_grid = {-1.0, -0.1, -0.01, 0.01, 0.1, 1.0});

/// Infinitesimal generator by central difference in s (step 1e-6).
Generator generator_eval(const OneParamAction& a);

}  // namespace socp
