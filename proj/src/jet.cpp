#include "socp/jet.hpp"

#include <algorithm>

namespace socp {

JetVec solve_linear(std::vector<JetVec> A, JetVec b) {
    const int n = static_cast<int>(b.size());
    if (static_cast<int>(A.size()) != n)
        throw std::invalid_argument("solve_linear: shape mismatch");
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r][col].v) > std::abs(A[piv][col].v)) piv = r;
        if (std::abs(A[piv][col].v) < 1e-300)
            throw EvalError("solve_linear: singular matrix");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        Jet d = inv(A[col][col]);
        for (int r = col + 1; r < n; ++r) {
            Jet factor = A[r][col] * d;
            for (int c = col; c < n; ++c) A[r][c] = A[r][c] - factor * A[col][c];
            b[r] = b[r] - factor * b[col];
        }
    }
    JetVec x(n);
    for (int r = n - 1; r >= 0; --r) {
        Jet s = b[r];
        for (int c = r + 1; c < n; ++c) s = s - A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    return x;
}

Jet chain_compose(double f0, const Vec& grad, const Mat& hess, const JetVec& args) {
    const int k = static_cast<int>(args.size());
    if (grad.size() != k) throw std::invalid_argument("chain_compose: gradient size mismatch");
    Jet r(f0);
    int n = 0;
    bool ord2 = false;
    for (const Jet& a : args)
        if (!a.constant()) {
            n = a.n();
            ord2 = a.second_order();
        }
    if (n == 0) return r;
    r.g = Vec::Zero(n);
    for (int i = 0; i < k; ++i)
        if (!args[i].constant()) r.g += grad[i] * args[i].g;
    if (ord2) {
        r.h = Mat::Zero(n, n);
        for (int i = 0; i < k; ++i)
            if (!args[i].constant()) r.h += grad[i] * args[i].h;
        if (hess.size() > 0) {
            for (int i = 0; i < k; ++i) {
                if (args[i].constant()) continue;
                for (int j = 0; j < k; ++j) {
                    if (args[j].constant()) continue;
                    r.h += hess(i, j) * (args[i].g * args[j].g.transpose());
                }
            }
        }
    }
    return r;
}

int Jet2::block_offset(const std::string& name) const {
    for (size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].name == name) return offsets[i];
    throw std::invalid_argument("unknown block: " + name);
}

int Jet2::block_size(const std::string& name) const {
    for (const auto& b : blocks)
        if (b.name == name) return b.size;
    throw std::invalid_argument("unknown block: " + name);
}

Mat Jet2::jac_block(const std::string& name) const {
    return jac.middleCols(block_offset(name), block_size(name));
}

Mat Jet2::hess_block(int output, const std::string& a, const std::string& b) const {
    return hess.at(output).block(block_offset(a), block_offset(b), block_size(a), block_size(b));
}

Jet2 jet_eval(const FlatFn& f, const std::vector<BlockTag>& blocks, const Vec& x, int order) {
    int total = 0;
    std::vector<int> offsets;
    for (const auto& b : blocks) {
        if (b.size <= 0) throw std::invalid_argument("block size must be positive");
        offsets.push_back(total);
        total += b.size;
    }
    if (total != x.size())
        throw std::invalid_argument("jet_eval: block sizes do not sum to input dimension");

    JetVec in = (order >= 1) ? seed_jets(x, order) : to_jets(x);
    JetVec out = f(in);
    const int m = static_cast<int>(out.size());

    Jet2 r;
    r.blocks = blocks;
    r.offsets = offsets;
    r.value = Vec(m);
    if (order >= 1) r.jac = Mat::Zero(m, total);
    if (order >= 2) r.hess.assign(m, Mat::Zero(total, total));
    for (int i = 0; i < m; ++i) {
        r.value[i] = out[i].v;
        if (!std::isfinite(out[i].v))
            throw EvalError("jet_eval: non-finite output at component " + std::to_string(i));
        if (order >= 1 && !out[i].constant()) r.jac.row(i) = out[i].g.transpose();
        if (order >= 2 && out[i].second_order()) r.hess[i] = out[i].h;
    }
    return r;
}

double fd_check(const FlatFn& f, const Vec& x, double step, int order) {
    auto value_at = [&](const Vec& p) {
        JetVec out = f(to_jets(p));
        Vec v(out.size());
        for (size_t i = 0; i < out.size(); ++i) v[static_cast<int>(i)] = out[i].v;
        return v;
    };
    const int n = static_cast<int>(x.size());
    std::vector<BlockTag> blocks{{"x", n}};
    Jet2 jets = jet_eval(f, blocks, x, order);
    const int m = static_cast<int>(jets.value.size());

    double dev = 0.0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); };
    if (order == 1) {
        for (int j = 0; j < n; ++j) {
            Vec xp = x, xm = x;
            xp[j] += step;
            xm[j] -= step;
            Vec d = (value_at(xp) - value_at(xm)) / (2.0 * step);
            for (int i = 0; i < m; ++i) dev = std::max(dev, rel(jets.jac(i, j), d[i]));
        }
        return dev;
    }
    if (order != 2) throw std::invalid_argument("fd_check: order must be 1 or 2");
    Vec f0 = value_at(x);
    for (int j = 0; j < n; ++j) {
        for (int k = j; k < n; ++k) {
            Vec d(m);
            if (j == k) {
                Vec xp = x, xm = x;
                xp[j] += step;
                xm[j] -= step;
                d = (value_at(xp) - 2.0 * f0 + value_at(xm)) / (step * step);
            } else {
                Vec xpp = x, xpm = x, xmp = x, xmm = x;
                xpp[j] += step;
                xpp[k] += step;
                xpm[j] += step;
                xpm[k] -= step;
                xmp[j] -= step;
                xmp[k] += step;
                xmm[j] -= step;
                xmm[k] -= step;
                d = (value_at(xpp) - value_at(xpm) - value_at(xmp) + value_at(xmm)) /
                    (4.0 * step * step);
            }
            for (int i = 0; i < m; ++i) dev = std::max(dev, rel(jets.hess[i](j, k), d[i]));
        }
    }
    return dev;
}

}  // namespace socp
