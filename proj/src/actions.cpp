#include "socp/actions.hpp"

namespace socp {

namespace {

Vec values_of(const JetVec& v) {
    Vec r(static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) r[static_cast<int>(i)] = v[i].v;
    return r;
}

Mat jacobian_of(const JetVec& out, int n) {
    Mat J = Mat::Zero(static_cast<int>(out.size()), n);
    for (size_t i = 0; i < out.size(); ++i)
        if (!out[i].constant()) J.row(static_cast<int>(i)) = out[i].g.transpose();
    return J;
}

}  // namespace

Vec OneParamAction::apply(double s, const Vec& q) const { return values_of(phi(s, to_jets(q))); }

Mat OneParamAction::jacobian(double s, const Vec& q) const {
    JetMat rows = dphi(s, to_jets(q));
    const int d = static_cast<int>(rows.size());
    Mat J(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) J(i, j) = rows[i][j].v;
    return J;
}

Mat OneParamAction::control_map(double s, const Vec& q, const Vec& v) const {
    if (!psi) return Mat();  // identity, sized by caller
    return psi(s, q, v);
}

Vec Generator::operator()(const Vec& q) const { return values_of(XQ(to_jets(q))); }

Diagnostics validate_action(const OneParamAction& a, const std::vector<Vec>& q_samples) {
    Diagnostics diag;
    double worst_id = 0.0, worst_group = 0.0;
    for (const Vec& q : q_samples) {
        worst_id = std::max(worst_id, (a.apply(0.0, q) - q).lpNorm<Eigen::Infinity>());
        for (double s : {0.07, -0.2}) {
            for (double t : {0.11, -0.05}) {
                Vec lhs = a.apply(s, a.apply(t, q));
                Vec rhs = a.apply(s + t, q);
                worst_group = std::max(worst_group, (lhs - rhs).lpNorm<Eigen::Infinity>());
            }
        }
    }
    diag.checks.push_back({"identity at s=0", worst_id <= 1e-12, std::to_string(worst_id)});
    diag.checks.push_back({"group property", worst_group <= 1e-10, std::to_string(worst_group)});
    return diag;
}

void lift_tangent(const OneParamAction& a, double s, const Vec& q, const Vec& v, Vec& q_out,
                  Vec& v_out) {
    q_out = a.apply(s, q);
    v_out = a.jacobian(s, q) * v;
}

void lift_cotangent(const OneParamAction& a, double s, const Vec& q, const Vec& lambda, Vec& q_out,
                    Vec& lambda_out) {
    q_out = a.apply(s, q);
    Mat J = a.jacobian(s, q);
    lambda_out = J.inverse().transpose() * lambda;
}

namespace {

// Jet evaluation of the cotangent-lifted action on T*Q as a map of (q, kappa):
// (q, kappa) -> (phi_s(q), Dphi_{-s}(phi_s(q))^T kappa).
JetVec cotangent_action_jets(const OneParamAction& a, double s, const JetVec& q,
                             const JetVec& kappa) {
    const int d = static_cast<int>(q.size());
    JetVec qs = a.phi(s, q);
    JetMat Ainv = a.dphi(-s, qs);  // D phi_{-s} at the image point
    JetVec out = qs;
    for (int i = 0; i < d; ++i) {
        Jet acc(0.0);
        for (int j = 0; j < d; ++j) acc = acc + Ainv[j][i] * kappa[j];
        out.push_back(acc);
    }
    return out;
}

// Jet evaluation of the tangent-lifted action on TQ as a map of (q, v).
JetVec tangent_action_jets(const OneParamAction& a, double s, const JetVec& q, const JetVec& v) {
    const int d = static_cast<int>(q.size());
    JetVec qs = a.phi(s, q);
    JetMat G = a.dphi(s, q);
    JetVec out = qs;
    for (int i = 0; i < d; ++i) {
        Jet acc(0.0);
        for (int j = 0; j < d; ++j) acc = acc + G[i][j] * v[j];
        out.push_back(acc);
    }
    return out;
}

}  // namespace

TwistedPoint lift_double(const OneParamAction& a, double s, const TwistedPoint& pt) {
    const int d = pt.dim_q;
    TwistedPoint out(pt.chart, d, pt.dim_u);
    Vec b0 = pt.block(0), b1 = pt.block(1), b2 = pt.block(2), b3 = pt.block(3);
    Vec u = pt.control();

    auto base_jets = [&](const Vec& x, const Vec& y) {
        Vec z(2 * d);
        z << x, y;
        return seed_jets(z, 1);
    };

    switch (pt.chart) {
        case Chart::PmpE: {
            // Base (q, v) transforms by the tangent lift, covectors by the
            // inverse transpose of its Jacobian.
            JetVec in = base_jets(b0, b1);
            JetVec qv(in.begin(), in.begin() + d), vv(in.begin() + d, in.end());
            JetVec img = tangent_action_jets(a, s, qv, vv);
            Mat J = jacobian_of(img, 2 * d);
            Vec lam(2 * d);
            lam << b2, b3;
            Vec lam_out = J.inverse().transpose() * lam;
            out.set_block(0, values_of(img).segment(0, d));
            out.set_block(1, values_of(img).segment(d, d));
            out.set_block(2, lam_out.segment(0, d));
            out.set_block(3, lam_out.segment(d, d));
            break;
        }
        case Chart::NewLagE: {
            // Base (q, kappa) on T*Q, velocities push forward by the Jacobian.
            JetVec in = base_jets(b0, b1);
            JetVec qv(in.begin(), in.begin() + d), kv(in.begin() + d, in.end());
            JetVec img = cotangent_action_jets(a, s, qv, kv);
            Mat J = jacobian_of(img, 2 * d);
            Vec vel(2 * d);
            vel << b2, b3;
            Vec vel_out = J * vel;
            out.set_block(0, values_of(img).segment(0, d));
            out.set_block(1, values_of(img).segment(d, d));
            out.set_block(2, vel_out.segment(0, d));
            out.set_block(3, vel_out.segment(d, d));
            break;
        }
        case Chart::NewHamE: {
            JetVec in = base_jets(b0, b1);
            JetVec qv(in.begin(), in.begin() + d), kv(in.begin() + d, in.end());
            JetVec img = cotangent_action_jets(a, s, qv, kv);
            Mat J = jacobian_of(img, 2 * d);
            Vec mom(2 * d);
            mom << b2, b3;
            Vec mom_out = J.inverse().transpose() * mom;
            out.set_block(0, values_of(img).segment(0, d));
            out.set_block(1, values_of(img).segment(d, d));
            out.set_block(2, mom_out.segment(0, d));
            out.set_block(3, mom_out.segment(d, d));
            break;
        }
        default:
            throw ChartError("lift_double: chart must be PmpE, NewLagE or NewHamE");
    }

    // Control block: psi at the underlying TQ base point.
    Vec q = b0;
    Vec v_like = (pt.chart == Chart::PmpE) ? b1 : (pt.chart == Chart::NewLagE ? b2 : b3);
    Mat P = a.control_map(s, q, v_like);
    out.set_control(P.size() ? Vec(P * u) : u);
    return out;
}

double invariance_residual(const std::function<double(const TwistedPoint&)>& fn,
                           const OneParamAction& a, const TwistedPoint& pt,
                           const std::vector<double>& s_grid) {
    double base = fn(pt);
    double worst = 0.0;
    for (double s : s_grid) worst = std::max(worst, std::abs(fn(lift_double(a, s, pt)) - base));
    return worst;
}

Generator generator_eval(const OneParamAction& a) {
    auto phi = a.phi;
    Generator g;
    g.XQ = [phi](const JetVec& q) -> JetVec {
        const double h = 1e-6;
        JetVec plus = phi(h, q), minus = phi(-h, q);
        JetVec r(q.size());
        for (size_t i = 0; i < q.size(); ++i) r[i] = (plus[i] - minus[i]) / (2.0 * h);
        return r;
    };
    return g;
}

}  // namespace socp
