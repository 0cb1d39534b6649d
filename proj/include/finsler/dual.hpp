#pragma once
#include <array>
#include <cmath>
#include <type_traits>

namespace finsler {

// Forward-mode dual number carrying N directional derivatives. Nesting
// Dual<Dual<double, N>, N> yields exact second derivatives.
template <class T, int N>
struct Dual {
    T v{};
    std::array<T, N> d{};

    Dual() = default;
    Dual(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
    explicit Dual(const T& value) requires(!std::is_same_v<T, double>) : v(value) {}
    Dual(const T& value, const std::array<T, N>& grad) requires(!std::is_same_v<T, double>)
        : v(value), d(grad) {}
    Dual(double value, const std::array<double, N>& grad) requires(std::is_same_v<T, double>)
        : v(value), d(grad) {}

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const T inv = T(1.0) / o.v;
        v *= inv;
        for (int i = 0; i < N; ++i) d[i] = (d[i] - v * o.d[i]) * inv;
        return *this;
    }
    Dual& operator*=(double c) {
        v *= c;
        for (auto& x : d) x *= c;
        return *this;
    }
    Dual& operator/=(double c) { return *this *= (1.0 / c); }
    Dual& operator+=(double c) {
        v += c;
        return *this;
    }
    Dual& operator-=(double c) {
        v -= c;
        return *this;
    }
};

template <class T>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Dual<T, N>& x) {
    return value_of(x.v);
}

template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a) {
    a *= -1.0;
    return a;
}
template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) {
    return a += b;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) {
    return a -= b;
}
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) {
    return a *= b;
}
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) {
    return a /= b;
}
template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, double c) {
    return a += c;
}
template <class T, int N>
Dual<T, N> operator+(double c, Dual<T, N> a) {
    return a += c;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, double c) {
    return a -= c;
}
template <class T, int N>
Dual<T, N> operator-(double c, const Dual<T, N>& a) {
    return -a + c;
}
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, double c) {
    return a *= c;
}
template <class T, int N>
Dual<T, N> operator*(double c, Dual<T, N> a) {
    return a *= c;
}
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, double c) {
    return a /= c;
}
template <class T, int N>
Dual<T, N> operator/(double c, const Dual<T, N>& a) {
    return Dual<T, N>(c) / a;
}

template <class T, int N>
bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value_of(a) < value_of(b);
}
template <class T, int N>
bool operator<(const Dual<T, N>& a, double b) {
    return value_of(a) < b;
}
template <class T, int N>
bool operator>(const Dual<T, N>& a, double b) {
    return value_of(a) > b;
}

// f(x) given f and f' evaluated at x.v (both of type T).
template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& x, const T& f, const T& df) {
    Dual<T, N> r;
    r.v = f;
    for (int i = 0; i < N; ++i) r.d[i] = df * x.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& x) {
    using std::sqrt;
    const T s = sqrt(x.v);
    return chain(x, s, 0.5 / s);
}
template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& x) {
    using std::exp;
    const T e = exp(x.v);
    return chain(x, e, e);
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& x) {
    using std::log;
    return chain(x, log(x.v), 1.0 / x.v);
}
template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& x) {
    using std::cos;
    using std::sin;
    return chain(x, sin(x.v), cos(x.v));
}
template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& x) {
    using std::cos;
    using std::sin;
    return chain(x, cos(x.v), -sin(x.v));
}
template <class T, int N>
Dual<T, N> asin(const Dual<T, N>& x) {
    using std::asin;
    using std::sqrt;
    return chain(x, asin(x.v), 1.0 / sqrt(1.0 - x.v * x.v));
}
template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& x, double p) {
    using std::pow;
    return chain(x, pow(x.v, p), p * pow(x.v, p - 1.0));
}

// Apply a scalar function known only through (f, f', f'') at value_of(x).
// Exact through second order, which is all the nested Dual carries.
inline double lift(double, double f0, double, double) { return f0; }
template <int N>
Dual<double, N> lift(const Dual<double, N>& x, double f0, double f1, double) {
    return chain(x, f0, f1);
}
template <int N>
Dual<Dual<double, N>, N> lift(const Dual<Dual<double, N>, N>& x, double f0, double f1, double f2) {
    const Dual<double, N> fv = chain(x.v, f0, f1);
    const Dual<double, N> dfv = chain(x.v, f1, f2);
    return chain(x, fv, dfv);
}

inline bool all_finite(double x) { return std::isfinite(x); }
template <class T, int N>
bool all_finite(const Dual<T, N>& x) {
    if (!all_finite(x.v)) return false;
    for (const auto& e : x.d)
        if (!all_finite(e)) return false;
    return true;
}

// Scalar types every field closure is instantiated for: plain values, first
// derivatives over up to four variables (x1, x2, y1, y2), and second derivatives.
using D1 = Dual<double, 4>;
using D2 = Dual<D1, 4>;

}  // namespace finsler
