#pragma once

#include <stdexcept>
#include <vector>

namespace socp {

/// First-order forward number over an arbitrary scalar T. Nesting Dual<Jet>
/// (or Dual<Dual<Jet>>) yields derivatives of derivative expressions, which
/// is how Lagrangian fiber quantities stay differentiable without symbolic
/// work. An empty gradient marks a constant, mirroring Jet's broadcast rule.
template <class T>
struct Dual {
    T v{};
    std::vector<T> g;

    Dual() = default;
    Dual(T value) : v(std::move(value)) {}  // NOLINT: implicit by design
    Dual(double value) : v(value) {}        // NOLINT
    Dual(T value, std::vector<T> grad) : v(std::move(value)), g(std::move(grad)) {}

    int n() const { return static_cast<int>(g.size()); }
    bool constant() const { return g.empty(); }

    static Dual seeded(T value, int n, int dir) {
        std::vector<T> grad(n, T(0.0));
        grad[dir] = T(1.0);
        return Dual(std::move(value), std::move(grad));
    }

    Dual operator-() const {
        Dual r(-v);
        r.g.reserve(g.size());
        for (const T& gi : g) r.g.push_back(-gi);
        return r;
    }
};

namespace detail {
template <class T>
int dual_width(const Dual<T>& a, const Dual<T>& b) {
    if (a.constant()) return b.n();
    if (b.constant()) return a.n();
    if (a.n() != b.n()) throw std::invalid_argument("dual width mismatch");
    return a.n();
}
}  // namespace detail

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    int n = detail::dual_width(a, b);
    Dual<T> r(a.v + b.v);
    r.g.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (a.constant())
            r.g.push_back(b.g[i]);
        else if (b.constant())
            r.g.push_back(a.g[i]);
        else
            r.g.push_back(a.g[i] + b.g[i]);
    }
    return r;
}

template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    return a + (-b);
}

template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    int n = detail::dual_width(a, b);
    Dual<T> r(a.v * b.v);
    r.g.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (a.constant())
            r.g.push_back(a.v * b.g[i]);
        else if (b.constant())
            r.g.push_back(a.g[i] * b.v);
        else
            r.g.push_back(a.g[i] * b.v + a.v * b.g[i]);
    }
    return r;
}

/// Chain rule through phi given phi(v) and phi'(v) as T values.
template <class T>
Dual<T> dual_chain(const Dual<T>& x, T f0, T f1) {
    Dual<T> r(std::move(f0));
    r.g.reserve(x.g.size());
    for (const T& gi : x.g) r.g.push_back(f1 * gi);
    return r;
}

template <class T>
Dual<T> inv(const Dual<T>& x) {
    T iv = 1.0 / x.v;
    return dual_chain(x, iv, -iv * iv);
}

template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    return a * inv(b);
}

template <class T>
Dual<T> operator+(const Dual<T>& a, double b) { return a + Dual<T>(b); }
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) { return a - Dual<T>(b); }
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) { return a * Dual<T>(b); }
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) { return Dual<T>(a) * b; }
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) { return a * Dual<T>(1.0 / b); }
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) * inv(b); }

using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tan;
using std::tanh;

template <class T>
Dual<T> sin(const Dual<T>& x) { return dual_chain(x, sin(x.v), cos(x.v)); }
template <class T>
Dual<T> cos(const Dual<T>& x) { return dual_chain(x, cos(x.v), -sin(x.v)); }
template <class T>
Dual<T> tan(const Dual<T>& x) {
    T t = tan(x.v);
    return dual_chain(x, t, 1.0 + t * t);
}
template <class T>
Dual<T> exp(const Dual<T>& x) {
    T e = exp(x.v);
    return dual_chain(x, e, e);
}
template <class T>
Dual<T> log(const Dual<T>& x) { return dual_chain(x, log(x.v), T(1.0) / x.v); }
template <class T>
Dual<T> sqrt(const Dual<T>& x) {
    T s = sqrt(x.v);
    return dual_chain(x, s, T(0.5) / s);
}
template <class T>
Dual<T> tanh(const Dual<T>& x) {
    T t = tanh(x.v);
    return dual_chain(x, t, 1.0 - t * t);
}
template <class T>
Dual<T> pow(const Dual<T>& x, int k) {
    if (k == 0) return Dual<T>(1.0);
    if (k < 0) return inv(pow(x, -k));
    Dual<T> r = x;
    for (int i = 1; i < k; ++i) r = r * x;
    return r;
}

/// Seeds x as dual variables occupying directions [offset, offset+len) of n.
template <class T>
std::vector<Dual<T>> seed_dual(const std::vector<T>& x, int n, int offset) {
    std::vector<Dual<T>> r(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        r[i] = Dual<T>::seeded(x[i], n, offset + static_cast<int>(i));
    return r;
}

/// Doubly nested seeding: both dual levels carry the same directions, so a
/// scalar evaluated on the result exposes its gradient and Hessian entries
/// as T values.
template <class T>
std::vector<Dual<Dual<T>>> seed_ddual(const std::vector<T>& x, int n, int offset) {
    std::vector<Dual<Dual<T>>> r(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        Dual<T> inner = Dual<T>::seeded(x[i], n, offset + static_cast<int>(i));
        std::vector<Dual<T>> outer(n, Dual<T>(0.0));
        outer[offset + i] = Dual<T>(1.0);
        r[i] = Dual<Dual<T>>(std::move(inner), std::move(outer));
    }
    return r;
}

}  // namespace socp
