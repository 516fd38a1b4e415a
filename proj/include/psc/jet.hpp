#pragma once
// Second-order forward-mode AD: value + gradient + Hessian, propagated
// through arithmetic with the chain rule. Capacity is fixed, dimension
// is set at runtime so one type serves charts of any size up to kMaxVars.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace psc {

inline constexpr int kMaxVars = 8;

struct Jet2 {
    int n = 0;
    double v = 0.0;
    std::array<double, kMaxVars> g{};
    std::array<double, kMaxVars * kMaxVars> h{};

    Jet2() = default;
    explicit Jet2(int dim, double value = 0.0) : n(dim), v(value) {
        if (dim < 0 || dim > kMaxVars)
            throw std::invalid_argument("Jet2: dimension out of range");
    }

    static Jet2 constant(int dim, double value) { return Jet2(dim, value); }

    static Jet2 variable(int dim, int index, double value) {
        Jet2 j(dim, value);
        j.g[index] = 1.0;
        return j;
    }

    double grad(int i) const { return g[i]; }
    double hess(int i, int j) const { return h[i * kMaxVars + j]; }
    double& hess(int i, int j) { return h[i * kMaxVars + j]; }
};

// Unary chain rule: r = f(a), r' = f'(a) a', r'' = f'(a) a'' + f''(a) a'⊗a'.
inline Jet2 apply(const Jet2& a, double f, double df, double ddf) {
    Jet2 r(a.n, f);
    for (int i = 0; i < a.n; ++i) r.g[i] = df * a.g[i];
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j)
            r.hess(i, j) = df * a.hess(i, j) + ddf * a.g[i] * a.g[j];
    return r;
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    Jet2 r(a.n, a.v + b.v);
    for (int i = 0; i < a.n; ++i) r.g[i] = a.g[i] + b.g[i];
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) r.hess(i, j) = a.hess(i, j) + b.hess(i, j);
    return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    Jet2 r(a.n, a.v - b.v);
    for (int i = 0; i < a.n; ++i) r.g[i] = a.g[i] - b.g[i];
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) r.hess(i, j) = a.hess(i, j) - b.hess(i, j);
    return r;
}

inline Jet2 operator-(const Jet2& a) {
    Jet2 r(a.n, -a.v);
    for (int i = 0; i < a.n; ++i) r.g[i] = -a.g[i];
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) r.hess(i, j) = -a.hess(i, j);
    return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r(a.n, a.v * b.v);
    for (int i = 0; i < a.n; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j)
            r.hess(i, j) = a.hess(i, j) * b.v + a.v * b.hess(i, j) +
                           a.g[i] * b.g[j] + a.g[j] * b.g[i];
    return r;
}

inline Jet2 inverse(const Jet2& a) {
    double iv = 1.0 / a.v;
    return apply(a, iv, -iv * iv, 2.0 * iv * iv * iv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inverse(b); }

inline Jet2 operator+(const Jet2& a, double c) { Jet2 r = a; r.v += c; return r; }
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }
inline Jet2 operator-(const Jet2& a, double c) { return a + (-c); }
inline Jet2 operator-(double c, const Jet2& a) { return (-a) + c; }
inline Jet2 operator*(const Jet2& a, double c) {
    Jet2 r(a.n, a.v * c);
    for (int i = 0; i < a.n; ++i) r.g[i] = a.g[i] * c;
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) r.hess(i, j) = a.hess(i, j) * c;
    return r;
}
inline Jet2 operator*(double c, const Jet2& a) { return a * c; }
inline Jet2 operator/(const Jet2& a, double c) { return a * (1.0 / c); }
inline Jet2 operator/(double c, const Jet2& a) { return inverse(a) * c; }

inline Jet2 exp(const Jet2& a)  { double e = std::exp(a.v); return apply(a, e, e, e); }
inline Jet2 log(const Jet2& a)  { return apply(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet2 sin(const Jet2& a)  { double s = std::sin(a.v), c = std::cos(a.v); return apply(a, s, c, -s); }
inline Jet2 cos(const Jet2& a)  { double s = std::sin(a.v), c = std::cos(a.v); return apply(a, c, -s, -c); }
inline Jet2 tan(const Jet2& a) {
    double t = std::tan(a.v), s = 1.0 + t * t;
    return apply(a, t, s, 2.0 * t * s);
}
inline Jet2 sinh(const Jet2& a) { double s = std::sinh(a.v), c = std::cosh(a.v); return apply(a, s, c, s); }
inline Jet2 cosh(const Jet2& a) { double s = std::sinh(a.v), c = std::cosh(a.v); return apply(a, c, s, c); }
inline Jet2 tanh(const Jet2& a) {
    double t = std::tanh(a.v), s = 1.0 - t * t;
    return apply(a, t, s, -2.0 * t * s);
}
inline Jet2 sqrt(const Jet2& a) {
    double s = std::sqrt(a.v);
    return apply(a, s, 0.5 / s, -0.25 / (s * a.v));
}
// |x| is smooth away from 0, which is all the evaluator guarantees.
inline Jet2 abs(const Jet2& a) {
    double sgn = a.v < 0.0 ? -1.0 : 1.0;
    return apply(a, std::fabs(a.v), sgn, 0.0);
}

// Integer power by the direct rule so negative bases are fine.
inline Jet2 powi(const Jet2& a, long long e) {
    if (e == 0) return Jet2::constant(a.n, 1.0);
    bool neg = e < 0;
    long long m = neg ? -e : e;
    double p = 1.0;        // a^m
    for (long long i = 0; i < m; ++i) p *= a.v;
    double pm1 = 1.0;      // a^(m-1)
    for (long long i = 0; i + 1 < m; ++i) pm1 *= a.v;
    double pm2 = 0.0;      // a^(m-2)
    if (m >= 2) { pm2 = 1.0; for (long long i = 0; i + 2 < m; ++i) pm2 *= a.v; }
    double md = static_cast<double>(m);
    Jet2 r = apply(a, p, md * pm1, m >= 2 ? md * (md - 1.0) * pm2 : 0.0);
    return neg ? inverse(r) : r;
}

inline Jet2 pow(const Jet2& a, const Jet2& b) { return exp(b * log(a)); }

} // namespace psc
