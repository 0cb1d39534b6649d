#pragma once
#include <array>
#include <cmath>

#include "finsler/dual.hpp"
#include "finsler/error.hpp"

namespace finsler {

template <class T>
struct Vec2 {
    std::array<T, 2> c{};

    Vec2() = default;
    Vec2(T a, T b) : c{a, b} {}

    T& operator[](int i) { return c[i]; }
    const T& operator[](int i) const { return c[i]; }
};

// General 2x2 matrix, row-major; m(i, j).
template <class T>
struct Mat2 {
    std::array<T, 4> e{};

    Mat2() = default;
    Mat2(T a11, T a12, T a21, T a22) : e{a11, a12, a21, a22} {}

    T& operator()(int i, int j) { return e[2 * i + j]; }
    const T& operator()(int i, int j) const { return e[2 * i + j]; }

    static Mat2 identity() { return Mat2(T(1.0), T(0.0), T(0.0), T(1.0)); }
};

template <class T>
Vec2<T> operator+(const Vec2<T>& a, const Vec2<T>& b) {
    return {a[0] + b[0], a[1] + b[1]};
}
template <class T>
Vec2<T> operator-(const Vec2<T>& a, const Vec2<T>& b) {
    return {a[0] - b[0], a[1] - b[1]};
}
template <class T, class S>
Vec2<T> operator*(const S& k, const Vec2<T>& a) {
    return {k * a[0], k * a[1]};
}

template <class T>
T dot(const Vec2<T>& a, const Vec2<T>& b) {
    return a[0] * b[0] + a[1] * b[1];
}

template <class T>
Mat2<T> operator+(const Mat2<T>& a, const Mat2<T>& b) {
    Mat2<T> r;
    for (int i = 0; i < 4; ++i) r.e[i] = a.e[i] + b.e[i];
    return r;
}
template <class T>
Mat2<T> operator-(const Mat2<T>& a, const Mat2<T>& b) {
    Mat2<T> r;
    for (int i = 0; i < 4; ++i) r.e[i] = a.e[i] - b.e[i];
    return r;
}
template <class T, class S>
Mat2<T> operator*(const S& k, const Mat2<T>& a) {
    Mat2<T> r;
    for (int i = 0; i < 4; ++i) r.e[i] = k * a.e[i];
    return r;
}

template <class T>
Vec2<T> operator*(const Mat2<T>& m, const Vec2<T>& v) {
    return {m(0, 0) * v[0] + m(0, 1) * v[1], m(1, 0) * v[0] + m(1, 1) * v[1]};
}

template <class T>
Mat2<T> operator*(const Mat2<T>& a, const Mat2<T>& b) {
    Mat2<T> r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
    return r;
}

template <class T>
Mat2<T> transpose(const Mat2<T>& m) {
    return {m(0, 0), m(1, 0), m(0, 1), m(1, 1)};
}

template <class T>
Mat2<T> outer(const Vec2<T>& a, const Vec2<T>& b) {
    return {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]};
}

template <class T>
T quad(const Mat2<T>& m, const Vec2<T>& v) {
    return dot(v, m * v);
}

template <class T>
T det(const Mat2<T>& m) {
    return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

inline double max_abs(const Mat2<double>& m) {
    double r = 0.0;
    for (double x : m.e) r = std::fmax(r, std::fabs(x));
    return r;
}

inline double norm(const Vec2<double>& v) { return std::hypot(v[0], v[1]); }

template <class T>
Mat2<T> inverse(const Mat2<T>& m) {
    const T dt = det(m);
    if (!(std::fabs(value_of(dt)) > 1e-300))
        throw Error(ErrorCode::SingularMetric, "2x2 matrix is singular");
    const T inv = T(1.0) / dt;
    return {m(1, 1) * inv, -m(0, 1) * inv, -m(1, 0) * inv, m(0, 0) * inv};
}

}  // namespace finsler
