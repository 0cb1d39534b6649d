#pragma once
#include <cmath>

#include "finsler/diffcore.hpp"
#include "finsler/fields.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

// Covariant derivative b_{i|j} of beta with respect to alpha, split into
// symmetric r_ij and antisymmetric s_ij parts, with the usual contractions.
struct BetaDecomposition {
    Christoffel chr;
    Mat2<double> bij;
    Mat2<double> r;
    Mat2<double> s;
    Vec2<double> b;      // b_i
    Vec2<double> b_up;   // b^i = a^ij b_j
    Vec2<double> r_i;    // r_j = b^i r_ij
    Vec2<double> s_i;    // s_j = b^i s_ij
    Vec2<double> s_up;   // s^i = a^ik s_k
    double b2 = 0.0;

    const Mat2<double>& a() const { return chr.a; }
    const Mat2<double>& a_inv() const { return chr.a_inv; }
};

struct ContractionsAt {
    double r00 = 0.0;
    double s0 = 0.0;
    Vec2<double> s0_up;  // s^i_0 = a^ik s_kj y^j
};

inline BetaDecomposition decompose(const MetricPair& pair, const Point& p) {
    BetaDecomposition d;
    d.chr = christoffel(pair, p);
    const Vec2<D1> bj = x_gradient(pair.beta, p);
    d.b = {bj[0].v, bj[1].v};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            d.bij(i, j) = bj[i].d[j] - d.b[0] * d.chr.gamma[0](i, j) - d.b[1] * d.chr.gamma[1](i, j);
    const Mat2<double> bt = transpose(d.bij);
    d.r = 0.5 * (d.bij + bt);
    d.s = 0.5 * (d.bij - bt);
    d.b_up = d.chr.a_inv * d.b;
    d.b2 = dot(d.b, d.b_up);
    d.r_i = transpose(d.r) * d.b_up;
    d.s_i = transpose(d.s) * d.b_up;
    d.s_up = d.chr.a_inv * d.s_i;
    return d;
}

inline ContractionsAt contractions(const BetaDecomposition& d, const Direction& y) {
    const Vec2<double> v = y.vec();
    ContractionsAt c;
    c.r00 = quad(d.r, v);
    c.s0 = dot(d.s_i, v);
    c.s0_up = d.chr.a_inv * (d.s * v);
    return c;
}

// max |s_12| over the grid; zero (to roundoff) iff beta is closed there.
inline double closedness_scan(const MetricPair& pair, const Grid& grid) {
    double m = 0.0;
    for (const auto& p : grid.points) {
        const Vec2<D1> bj = x_gradient(pair.beta, p);
        m = std::fmax(m, std::fabs(0.5 * (bj[0].d[1] - bj[1].d[0])));
    }
    return m;
}

// max |grad(b^2)| over the grid.
inline double b_constancy_scan(const MetricPair& pair, const Grid& grid) {
    double m = 0.0;
    for (const auto& p : grid.points) {
        const D1 b2 = x_gradient([&](const auto& x) { return beta_norm2(pair, x); }, p);
        m = std::fmax(m, std::hypot(b2.d[0], b2.d[1]));
    }
    return m;
}

}  // namespace finsler
