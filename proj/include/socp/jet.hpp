#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace socp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when an evaluation leaves the declared domain of a problem
/// function (singularities, guarded regions) or produces non-finite values.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Truncated second-order Taylor scalar: value, gradient and Hessian with
/// respect to a fixed set of n seed directions. A jet with n == 0 acts as a
/// constant and combines with jets of any width. The Hessian block is only
/// carried when the seeds were created with order 2; mixing orders in one
/// expression is a programming error.
class Jet {
public:
    double v = 0.0;
    Vec g;  // size n, empty for constants
    Mat h;  // n x n, empty when only first order is tracked

    Jet() = default;
    Jet(double value) : v(value) {}  // NOLINT: implicit by design
    Jet(double value, Vec grad) : v(value), g(std::move(grad)) {}
    Jet(double value, Vec grad, Mat hess) : v(value), g(std::move(grad)), h(std::move(hess)) {}

    int n() const { return static_cast<int>(g.size()); }
    bool second_order() const { return h.size() > 0; }
    bool constant() const { return g.size() == 0; }

    static Jet seeded(double value, int n, int dir, int order) {
        Jet j(value, Vec::Zero(n));
        j.g[dir] = 1.0;
        if (order >= 2) j.h = Mat::Zero(n, n);
        return j;
    }

    Jet operator-() const {
        Jet r(-v);
        if (!constant()) {
            r.g = -g;
            if (second_order()) r.h = -h;
        }
        return r;
    }
};

namespace detail {

// Resolves the broadcast pattern of a binary op: at most one operand may be
// constant; otherwise widths and orders must agree.
inline void binary_shape(const Jet& a, const Jet& b, int& n, bool& ord2) {
    if (a.constant()) {
        n = b.n();
        ord2 = b.second_order();
    } else if (b.constant()) {
        n = a.n();
        ord2 = a.second_order();
    } else {
        if (a.n() != b.n() || a.second_order() != b.second_order())
            throw std::invalid_argument("jet shape mismatch in binary op");
        n = a.n();
        ord2 = a.second_order();
    }
}

}  // namespace detail

inline Jet operator+(const Jet& a, const Jet& b) {
    int n;
    bool ord2;
    detail::binary_shape(a, b, n, ord2);
    Jet r(a.v + b.v);
    if (n == 0) return r;
    r.g = Vec::Zero(n);
    if (!a.constant()) r.g += a.g;
    if (!b.constant()) r.g += b.g;
    if (ord2) {
        r.h = Mat::Zero(n, n);
        if (!a.constant()) r.h += a.h;
        if (!b.constant()) r.h += b.h;
    }
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

inline Jet operator*(const Jet& a, const Jet& b) {
    int n;
    bool ord2;
    detail::binary_shape(a, b, n, ord2);
    Jet r(a.v * b.v);
    if (n == 0) return r;
    r.g = Vec::Zero(n);
    if (!a.constant()) r.g += a.g * b.v;
    if (!b.constant()) r.g += b.g * a.v;
    if (ord2) {
        r.h = Mat::Zero(n, n);
        if (!a.constant()) r.h += a.h * b.v;
        if (!b.constant()) r.h += b.h * a.v;
        if (!a.constant() && !b.constant()) {
            r.h += a.g * b.g.transpose();
            r.h += b.g * a.g.transpose();
        }
    }
    return r;
}

/// Composes phi(x) with the jet x given phi's value and first two derivatives
/// at x.v. This is the single chain rule every elementary function reduces to.
inline Jet jet_chain(const Jet& x, double f0, double f1, double f2) {
    Jet r(f0);
    if (x.constant()) return r;
    r.g = f1 * x.g;
    if (x.second_order()) r.h = f1 * x.h + f2 * (x.g * x.g.transpose());
    return r;
}

inline Jet inv(const Jet& x) {
    if (x.v == 0.0) throw EvalError("jet division by zero");
    double iv = 1.0 / x.v;
    return jet_chain(x, iv, -iv * iv, 2.0 * iv * iv * iv);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }

inline Jet operator+(const Jet& a, double b) { return a + Jet(b); }
inline Jet operator+(double a, const Jet& b) { return Jet(a) + b; }
inline Jet operator-(const Jet& a, double b) { return a - Jet(b); }
inline Jet operator-(double a, const Jet& b) { return Jet(a) - b; }
inline Jet operator*(const Jet& a, double b) { return a * Jet(b); }
inline Jet operator*(double a, const Jet& b) { return Jet(a) * b; }
inline Jet operator/(const Jet& a, double b) { return a * Jet(1.0 / b); }
inline Jet operator/(double a, const Jet& b) { return Jet(a) * inv(b); }

inline bool operator<(const Jet& a, const Jet& b) { return a.v < b.v; }
inline bool operator>(const Jet& a, const Jet& b) { return a.v > b.v; }

inline Jet sin(const Jet& x) { return jet_chain(x, std::sin(x.v), std::cos(x.v), -std::sin(x.v)); }
inline Jet cos(const Jet& x) { return jet_chain(x, std::cos(x.v), -std::sin(x.v), -std::cos(x.v)); }
inline Jet tan(const Jet& x) {
    double t = std::tan(x.v);
    double s = 1.0 + t * t;
    return jet_chain(x, t, s, 2.0 * t * s);
}
inline Jet exp(const Jet& x) {
    double e = std::exp(x.v);
    return jet_chain(x, e, e, e);
}
inline Jet log(const Jet& x) {
    if (x.v <= 0.0) throw EvalError("jet log of non-positive value");
    return jet_chain(x, std::log(x.v), 1.0 / x.v, -1.0 / (x.v * x.v));
}
inline Jet sqrt(const Jet& x) {
    if (x.v <= 0.0) throw EvalError("jet sqrt of non-positive value");
    double s = std::sqrt(x.v);
    return jet_chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}
inline Jet tanh(const Jet& x) {
    double t = std::tanh(x.v);
    double s = 1.0 - t * t;
    return jet_chain(x, t, s, -2.0 * t * s);
}
inline Jet pow(const Jet& x, int k) {
    if (k == 0) return Jet(1.0);
    if (k < 0) return inv(pow(x, -k));
    Jet r = x;
    for (int i = 1; i < k; ++i) r = r * x;
    return r;
}

using JetVec = std::vector<Jet>;

inline Jet dot(const JetVec& a, const JetVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("jet dot: size mismatch");
    Jet s(0.0);
    for (size_t i = 0; i < a.size(); ++i) s = s + a[i] * b[i];
    return s;
}

inline JetVec to_jets(const Vec& x) {
    JetVec r(x.size());
    for (int i = 0; i < x.size(); ++i) r[i] = Jet(x[i]);
    return r;
}

/// Seeds x as n independent jet variables of the requested order.
inline JetVec seed_jets(const Vec& x, int order) {
    int n = static_cast<int>(x.size());
    JetVec r(n);
    for (int i = 0; i < n; ++i)
        r[i] = (order >= 1) ? Jet::seeded(x[i], n, i, order) : Jet(x[i]);
    return r;
}

/// Seeds a subrange of a wider variable set: x holds the values of this
/// block, dirs [offset, offset+len) of n total directions belong to it.
inline JetVec seed_block(const Vec& x, int n, int offset, int order) {
    JetVec r(x.size());
    for (int i = 0; i < x.size(); ++i)
        r[i] = (order >= 1) ? Jet::seeded(x[i], n, offset + i, order) : Jet(x[i]);
    return r;
}

/// Gaussian elimination with partial pivoting on jet entries (pivot chosen by
/// value magnitude). Sizes here are the problem dimensions, always tiny.
JetVec solve_linear(std::vector<JetVec> A, JetVec b);

/// Composes a scalar with known derivatives w.r.t. its k arguments with k jet
/// arguments: result = f(args), with f0 = f(value), grad/hess w.r.t. args.
Jet chain_compose(double f0, const Vec& grad, const Mat& hess, const JetVec& args);

struct BlockTag {
    std::string name;
    int size = 0;
};

/// Dense derivative record of a vector function w.r.t. tagged input blocks.
struct Jet2 {
    Vec value;               // m outputs
    Mat jac;                 // m x n, empty if order < 1
    std::vector<Mat> hess;   // per output, n x n, empty if order < 2
    std::vector<BlockTag> blocks;
    std::vector<int> offsets;

    int block_offset(const std::string& name) const;
    int block_size(const std::string& name) const;
    Mat jac_block(const std::string& name) const;
    Mat hess_block(int output, const std::string& a, const std::string& b) const;
};

using FlatFn = std::function<JetVec(const JetVec&)>;

/// Evaluates f at x with forward jets of the requested order (0, 1 or 2).
/// Throws std::invalid_argument on dimension mismatch and EvalError when the
/// output is non-finite.
Jet2 jet_eval(const FlatFn& f, const std::vector<BlockTag>& blocks, const Vec& x, int order);

/// Max relative deviation between jet derivatives of f at x and central
/// finite differences with the given step; order selects first (1) or second
/// (2) derivatives. Deviations are normalized with floor 1.
double fd_check(const FlatFn& f, const Vec& x, double step, int order = 1);

}  // namespace socp
