#pragma once
#include <array>
#include <cmath>

namespace finsler {

// Truncated univariate power series sum c[i] s^i, i < N. Arithmetic is exact
// up to truncation, so coefficients are jets at s = 0 of any order.
template <int N>
struct Taylor {
    std::array<double, N> c{};

    Taylor() = default;
    Taylor(double k) { c[0] = k; }  // NOLINT(google-explicit-constructor)

    static Taylor variable() {
        Taylor t;
        if constexpr (N > 1) t.c[1] = 1.0;
        return t;
    }
};

template <int N>
Taylor<N> operator+(Taylor<N> a, const Taylor<N>& b) {
    for (int i = 0; i < N; ++i) a.c[i] += b.c[i];
    return a;
}
template <int N>
Taylor<N> operator-(Taylor<N> a, const Taylor<N>& b) {
    for (int i = 0; i < N; ++i) a.c[i] -= b.c[i];
    return a;
}
template <int N>
Taylor<N> operator-(Taylor<N> a) {
    for (auto& x : a.c) x = -x;
    return a;
}
template <int N>
Taylor<N> operator*(const Taylor<N>& a, const Taylor<N>& b) {
    Taylor<N> r;
    for (int i = 0; i < N; ++i)
        for (int j = 0; i + j < N; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}
template <int N>
Taylor<N> operator*(double k, Taylor<N> a) {
    for (auto& x : a.c) x *= k;
    return a;
}
template <int N>
Taylor<N> operator/(const Taylor<N>& a, const Taylor<N>& b) {
    Taylor<N> r;
    for (int n = 0; n < N; ++n) {
        double acc = a.c[n];
        for (int k = 0; k < n; ++k) acc -= r.c[k] * b.c[n - k];
        r.c[n] = acc / b.c[0];
    }
    return r;
}

template <int N>
Taylor<N> operator+(double k, Taylor<N> a) {
    a.c[0] += k;
    return a;
}
template <int N>
Taylor<N> operator+(Taylor<N> a, double k) {
    a.c[0] += k;
    return a;
}
template <int N>
Taylor<N> operator-(double k, const Taylor<N>& a) {
    return k + (-a);
}
template <int N>
Taylor<N> operator-(Taylor<N> a, double k) {
    a.c[0] -= k;
    return a;
}
template <int N>
Taylor<N> operator*(Taylor<N> a, double k) {
    return k * a;
}
template <int N>
Taylor<N> operator/(Taylor<N> a, double k) {
    return (1.0 / k) * a;
}
template <int N>
Taylor<N> operator/(double k, const Taylor<N>& a) {
    return Taylor<N>(k) / a;
}

// a^p for a.c[0] > 0, via the recurrence from f' a = p a' f.
template <int N>
Taylor<N> pow(const Taylor<N>& a, double p) {
    Taylor<N> f;
    f.c[0] = std::pow(a.c[0], p);
    for (int n = 1; n < N; ++n) {
        double acc = 0.0;
        for (int k = 1; k <= n; ++k) acc += (p * k - (n - k)) * a.c[k] * f.c[n - k];
        f.c[n] = acc / (n * a.c[0]);
    }
    return f;
}
template <int N>
Taylor<N> sqrt(const Taylor<N>& a) {
    return pow(a, 0.5);
}

// Antiderivative vanishing at 0 (the top coefficient is dropped).
template <int N>
Taylor<N> integrate(const Taylor<N>& a) {
    Taylor<N> r;
    for (int i = 1; i < N; ++i) r.c[i] = a.c[i - 1] / i;
    return r;
}

// s^n as a series.
template <int N>
Taylor<N> monomial(int n, double k = 1.0) {
    Taylor<N> r;
    if (n < N) r.c[n] = k;
    return r;
}

}  // namespace finsler
