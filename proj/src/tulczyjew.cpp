#include "socp/tulczyjew.hpp"

#include <random>

namespace socp {

const char* to_string(Chart c) {
    switch (c) {
        case Chart::PmpE: return "T*TQ+E";
        case Chart::NewLagE: return "TT*Q+aE";
        case Chart::NewHamE: return "T*T*Q+bE";
        case Chart::TangentE: return "TTQ+kE";
        case Chart::ForcedImage: return "T*TQ+aLE";
        case Chart::TangentHamF: return "TT*Q+F";
        case Chart::HamPmpF: return "T*T*Q+F";
        case Chart::AlphaTildeF: return "T*TQ+aF";
    }
    return "?";
}

TwistedPoint::TwistedPoint(Chart c, const Vec& b0, const Vec& b1, const Vec& b2, const Vec& b3,
                           const Vec& u)
    : chart(c), dim_q(static_cast<int>(b0.size())), dim_u(static_cast<int>(u.size())) {
    if (b1.size() != dim_q || b2.size() != dim_q || b3.size() != dim_q)
        throw std::invalid_argument("TwistedPoint: block sizes differ");
    coords = Vec(4 * dim_q + dim_u);
    coords << b0, b1, b2, b3, u;
}

Vec TwistedPoint::block(int i) const { return coords.segment(i * dim_q, dim_q); }

void TwistedPoint::set_block(int i, const Vec& v) { coords.segment(i * dim_q, dim_q) = v; }

Vec TwistedPoint::control() const { return coords.segment(4 * dim_q, dim_u); }

void TwistedPoint::set_control(const Vec& u) { coords.segment(4 * dim_q, dim_u) = u; }

void TwistedPoint::require(Chart c) const {
    if (chart != c)
        throw ChartError(std::string("expected chart ") + to_string(c) + ", got " +
                         to_string(chart));
}

TwistedPoint from_pmp(const OcpProblem& p, const PmpPoint& pt) {
    (void)p;
    return TwistedPoint(Chart::PmpE, pt.q, pt.v, pt.lq, pt.lv, pt.u);
}
TwistedPoint from_newlag(const OcpProblem& p, const NewLagPoint& pt) {
    (void)p;
    return TwistedPoint(Chart::NewLagE, pt.q, pt.k, pt.vq, pt.vk, pt.u);
}
TwistedPoint from_newham(const OcpProblem& p, const NewHamPoint& pt) {
    (void)p;
    return TwistedPoint(Chart::NewHamE, pt.q, pt.k, pt.pq, pt.pk, pt.u);
}
TwistedPoint from_forced(const OcpProblem& p, const ForcedPoint& pt) {
    (void)p;
    return TwistedPoint(Chart::TangentE, pt.q, pt.xi, pt.vq, pt.vxi, pt.u);
}
TwistedPoint from_forced_image(const OcpProblem& p, const ForcedImagePoint& pt) {
    (void)p;
    return TwistedPoint(Chart::ForcedImage, pt.q, pt.xi, pt.wq, pt.wxi, pt.u);
}

PmpPoint to_pmp(const TwistedPoint& pt) {
    pt.require(Chart::PmpE);
    return {pt.block(0), pt.block(1), pt.block(2), pt.block(3), pt.control()};
}
NewLagPoint to_newlag(const TwistedPoint& pt) {
    pt.require(Chart::NewLagE);
    return {pt.block(0), pt.block(1), pt.block(2), pt.block(3), pt.control()};
}
NewHamPoint to_newham(const TwistedPoint& pt) {
    pt.require(Chart::NewHamE);
    return {pt.block(0), pt.block(1), pt.block(2), pt.block(3), pt.control()};
}
ForcedPoint to_forced(const TwistedPoint& pt) {
    pt.require(Chart::TangentE);
    return {pt.block(0), pt.block(1), pt.block(2), pt.block(3), pt.control()};
}
ForcedImagePoint to_forced_image(const TwistedPoint& pt) {
    pt.require(Chart::ForcedImage);
    return {pt.block(0), pt.block(1), pt.block(2), pt.block(3), pt.control()};
}

TwistedPoint alpha_map(const TwistedPoint& pt) {
    pt.require(Chart::NewLagE);
    // (q, kappa, v_q, v_kappa) -> (q, v_q, v_kappa, kappa)
    return TwistedPoint(Chart::PmpE, pt.block(0), pt.block(2), pt.block(3), pt.block(1),
                        pt.control());
}

TwistedPoint alpha_inverse(const TwistedPoint& pt) {
    pt.require(Chart::PmpE);
    return TwistedPoint(Chart::NewLagE, pt.block(0), pt.block(3), pt.block(1), pt.block(2),
                        pt.control());
}

TwistedPoint beta_map(const TwistedPoint& pt) {
    pt.require(Chart::NewLagE);
    // (q, kappa, v_q, v_kappa) -> (q, kappa, -v_kappa, v_q)
    return TwistedPoint(Chart::NewHamE, pt.block(0), pt.block(1), -pt.block(3), pt.block(2),
                        pt.control());
}

TwistedPoint beta_inverse(const TwistedPoint& pt) {
    pt.require(Chart::NewHamE);
    return TwistedPoint(Chart::NewLagE, pt.block(0), pt.block(1), pt.block(3), -pt.block(2),
                        pt.control());
}

TwistedPoint kappa_map(const TwistedPoint& pt) {
    pt.require(Chart::TangentE);
    // canonical involution: swap the two middle blocks
    return TwistedPoint(Chart::TangentE, pt.block(0), pt.block(2), pt.block(1), pt.block(3),
                        pt.control());
}

TwistedPoint musical_flat(const OcpProblem& p, const TwistedPoint& pt) {
    pt.require(Chart::TangentE);
    if (!p.lagrangian)
        throw UnsupportedFormulationError("musical maps need a Lagrangian system");
    const int d = pt.dim_q;
    Vec q = pt.block(0), xi = pt.block(1), vq = pt.block(2), vxi = pt.block(3), u = pt.control();
    LagrangianHessian H = lagrangian_hessian(*p.lagrangian, to_jets(q), to_jets(vq));
    JetVec vqj = seed_block(vq, d, 0, 1);
    JetVec fl = p.lagrangian->force(to_jets(q), vqj, to_jets(u));
    Vec kappa = Vec::Zero(d), vkappa = Vec::Zero(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            kappa[i] += H.hvv[i][j].v * xi[j];
            vkappa[i] += H.hvv[i][j].v * vxi[j];
        }
        for (int j = 0; j < d; ++j)
            if (!fl[j].constant()) vkappa[i] += fl[j].g[i] * xi[j];
    }
    // Image in the PMP chart: (q, v_q, lambda_q = v_kappa, lambda_v = kappa).
    return TwistedPoint(Chart::PmpE, q, vq, vkappa, kappa, u);
}

TwistedPoint musical_sharp(const OcpProblem& p, const TwistedPoint& pt) {
    pt.require(Chart::PmpE);
    if (!p.lagrangian)
        throw UnsupportedFormulationError("musical maps need a Lagrangian system");
    const int d = pt.dim_q;
    Vec q = pt.block(0), vq = pt.block(1), vkappa = pt.block(2), kappa = pt.block(3),
        u = pt.control();
    LagrangianHessian H = lagrangian_hessian(*p.lagrangian, to_jets(q), to_jets(vq));
    Mat hvv(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) hvv(i, j) = H.hvv[i][j].v;
    Eigen::PartialPivLU<Mat> lu(hvv);
    Vec xi = lu.solve(kappa);
    JetVec vqj = seed_block(vq, d, 0, 1);
    JetVec fl = p.lagrangian->force(to_jets(q), vqj, to_jets(u));
    Vec rhs = vkappa;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (!fl[j].constant()) rhs[i] -= fl[j].g[i] * xi[j];
    Vec vxi = lu.solve(rhs);
    return TwistedPoint(Chart::TangentE, q, xi, vq, vxi, u);
}

TwistedPoint chi_tilde1(const OcpProblem& p, const TwistedPoint& pt) {
    pt.require(Chart::ForcedImage);
    if (!p.lagrangian)
        throw UnsupportedFormulationError("chi lift needs a Lagrangian system");
    // (q, xi, w_q, w_xi, u) -> (q, p = w_xi, -w_q, xi, u); the simple control
    // lift leaves u unchanged.
    return TwistedPoint(Chart::HamPmpF, pt.block(0), pt.block(3), -pt.block(2), pt.block(1),
                        pt.control());
}

TwoForm presymplectic_form(Chart chart, int dim_q, int dim_u) {
    const int n = 4 * dim_q + dim_u;
    Mat m = Mat::Zero(n, n);
    auto pair_blocks = [&](int a, int b) {
        for (int i = 0; i < dim_q; ++i) {
            m(a * dim_q + i, b * dim_q + i) = 1.0;
            m(b * dim_q + i, a * dim_q + i) = -1.0;
        }
    };
    switch (chart) {
        case Chart::PmpE:
            pair_blocks(0, 2);  // dq ^ dlambda_q
            pair_blocks(1, 3);  // dv ^ dlambda_v
            break;
        case Chart::NewHamE:
            pair_blocks(0, 2);  // dq ^ dp_q
            pair_blocks(1, 3);  // dkappa ^ dp_kappa
            break;
        case Chart::NewLagE:
            pair_blocks(0, 3);  // dq ^ dv_kappa
            pair_blocks(2, 1);  // dv_q ^ dkappa
            break;
        default:
            throw ChartError(std::string("no presymplectic form registered for chart ") +
                             to_string(chart));
    }
    return TwoForm{std::move(m)};
}

double geometric_residual(const TwoForm& form, const Vec& field, const Vec& dH) {
    const int n = static_cast<int>(form.matrix.rows());
    if (field.size() != n || dH.size() != n) {
        // Allow state-only inputs against a form with a control block.
        if (field.size() == dH.size() && field.size() < n) {
            Mat sub = form.matrix.topLeftCorner(field.size(), field.size());
            Vec r = sub.transpose() * field - dH;
            return r.lpNorm<Eigen::Infinity>();
        }
        throw std::invalid_argument("geometric_residual: dimension mismatch");
    }
    Vec r = form.matrix.transpose() * field - dH;
    // Restrict to the non-control coordinates.
    int keep = n;
    for (int i = 0; i < n; ++i)
        if (form.matrix.row(i).isZero(0.0) && form.matrix.col(i).isZero(0.0)) {
            keep = i;
            break;
        }
    return r.head(keep).lpNorm<Eigen::Infinity>();
}

Mat map_jacobian_fd(const std::function<Vec(const Vec&)>& f, const Vec& x, double step) {
    const int n = static_cast<int>(x.size());
    Vec f0 = f(x);
    Mat J(f0.size(), n);
    for (int j = 0; j < n; ++j) {
        Vec xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * step);
    }
    return J;
}

std::vector<TwistedPoint> sample_chart_points(const OcpProblem& p, Chart chart, int count,
                                              std::uint64_t seed) {
    const int d = p.dim_q();
    std::mt19937_64 rng(seed);
    auto draw = [&](const Vec& lo, const Vec& hi, int i) {
        std::uniform_real_distribution<double> dist(lo[i], hi[i]);
        return dist(rng);
    };
    auto draw_adj = [&](int i) {
        if (p.box.adj_lo.size()) return draw(p.box.adj_lo, p.box.adj_hi, i % d);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        return dist(rng);
    };
    std::vector<TwistedPoint> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        Vec q(d), vlike(d), a1(d), a2(d), u(p.dim_u());
        for (int i = 0; i < d; ++i) {
            q[i] = draw(p.box.q_lo, p.box.q_hi, i);
            vlike[i] = draw(p.box.v_lo, p.box.v_hi, i);
            a1[i] = draw_adj(i);
            a2[i] = draw_adj(i);
        }
        for (int i = 0; i < p.dim_u(); ++i) u[i] = draw(p.box.u_lo, p.box.u_hi, i);
        switch (chart) {
            case Chart::PmpE:
                pts.emplace_back(chart, q, vlike, a1, a2, u);
                break;
            case Chart::NewLagE:
            case Chart::TangentE:
                pts.emplace_back(chart, q, a1, vlike, a2, u);
                break;
            case Chart::NewHamE:
                pts.emplace_back(chart, q, a1, a2, vlike, u);
                break;
            case Chart::ForcedImage:
                pts.emplace_back(chart, q, a1, a2, vlike, u);
                break;
            default:
                throw ChartError("sample_chart_points: unsupported chart");
        }
    }
    return pts;
}

}  // namespace socp
