#pragma once
#include <array>
#include <cmath>

#include "finsler/dual.hpp"
#include "finsler/error.hpp"
#include "finsler/linalg.hpp"
#include "finsler/poly_function.hpp"

namespace finsler {

struct Point {
    double x1 = 0.0;
    double x2 = 0.0;

    Vec2<double> vec() const { return {x1, x2}; }
    bool operator==(const Point&) const = default;
};

struct Direction {
    double y1 = 0.0;
    double y2 = 0.0;

    Vec2<double> vec() const { return {y1, y2}; }
    bool operator==(const Direction&) const = default;
};

// Value, gradient and Hessian of a scalar field in x.
struct Jet2 {
    double value = 0.0;
    std::array<double, 2> grad{};
    Mat2<double> hess;
};

// Derivatives of F(x, y) up to second order in y and mixed (x, y).
// F_xy(k, l) = d^2 F / dx^k dy^l.
struct MixedJet {
    double F = 0.0;
    std::array<double, 2> F_y{};
    std::array<double, 2> F_x{};
    Mat2<double> F_yy;
    Mat2<double> F_xy;
};

namespace detail {

// Variable slots in the 4-variable jet.
inline constexpr int kX1 = 0;
inline constexpr int kX2 = 1;
inline constexpr int kY1 = 2;
inline constexpr int kY2 = 3;

inline D2 seed(double value, int slot) {
    D2 r;
    r.v = D1(value);
    r.v.d[slot] = 1.0;
    r.d[slot] = D1(1.0);
    return r;
}

inline double first(const D2& f, int i) { return f.d[i].v; }
inline double second(const D2& f, int i, int j) { return f.d[i].d[j]; }

}  // namespace detail

inline Jet2 x_jet(const ScalarField& field, const Point& p) {
    using namespace detail;
    const Vec2<D2> x{seed(p.x1, kX1), seed(p.x2, kX2)};
    const D2 f = field(x);
    if (!all_finite(f)) throw Error(ErrorCode::NumericalBlowup, "non-finite jet in x_jet");
    Jet2 j;
    j.value = f.v.v;
    j.grad = {first(f, kX1), first(f, kX2)};
    j.hess = {second(f, kX1, kX1), second(f, kX1, kX2), second(f, kX2, kX1), second(f, kX2, kX2)};
    return j;
}

inline MixedJet xy_jet(const FinslerFunction& F, const Point& p, const Direction& y) {
    using namespace detail;
    if (y.y1 == 0.0 && y.y2 == 0.0)
        throw Error(ErrorCode::DegenerateDirection, "xy_jet requires y != 0");
    const Vec2<D2> x{seed(p.x1, kX1), seed(p.x2, kX2)};
    const Vec2<D2> v{seed(y.y1, kY1), seed(y.y2, kY2)};
    const D2 f = F(x, v);
    if (!all_finite(f)) throw Error(ErrorCode::NumericalBlowup, "non-finite jet in xy_jet");
    MixedJet j;
    j.F = f.v.v;
    j.F_y = {first(f, kY1), first(f, kY2)};
    j.F_x = {first(f, kX1), first(f, kX2)};
    j.F_yy = {second(f, kY1, kY1), second(f, kY1, kY2), second(f, kY2, kY1), second(f, kY2, kY2)};
    j.F_xy = {second(f, kX1, kY1), second(f, kX1, kY2), second(f, kX2, kY1), second(f, kX2, kY2)};
    return j;
}

// First derivatives of a field in x only; cheaper than x_jet.
template <class Fn>
auto x_gradient(const Fn& field, const Point& p) {
    Vec2<D1> x{D1(p.x1), D1(p.x2)};
    x[0].d[0] = 1.0;
    x[1].d[1] = 1.0;
    return field(x);
}

}  // namespace finsler
