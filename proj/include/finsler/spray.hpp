#pragma once
#include <cmath>
#include <functional>
#include <vector>

#include "finsler/betacalc.hpp"
#include "finsler/diffcore.hpp"
#include "finsler/fields.hpp"
#include "finsler/phi.hpp"

namespace finsler {

// F = alpha phi(beta / alpha), differentiable through the D1/D2 closures.
inline FinslerFunction finsler_function(const MetricPair& pair, const PhiFamily& family) {
    return [pair, family](const auto& x, const auto& y) {
        using std::sqrt;
        using T = std::decay_t<decltype(x[0])>;
        const T alpha = sqrt(quad(pair.a(x), y));
        const T s = dot(pair.b(x), y) / alpha;
        const PhiJet j = phi_jet(family, value_of(s));
        return alpha * lift(s, j.phi, j.d1, j.d2);
    };
}

// Riemannian F = alpha.
inline FinslerFunction riemannian_function(const MetricPair& pair) {
    return [pair](const auto& x, const auto& y) {
        using std::sqrt;
        return sqrt(quad(pair.a(x), y));
    };
}

using SprayProvider = std::function<Vec2<double>(const Point&, const Direction&)>;

// G^i = 1/4 g^il {[F^2]_{x^k y^l} y^k - [F^2]_{x^l}}
inline Vec2<double> spray_generic(const FinslerFunction& F, const Point& p, const Direction& y) {
    const MixedJet j = xy_jet(F, p, y);
    const Vec2<double> v = y.vec();
    Mat2<double> g;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) g(a, b) = j.F_y[a] * j.F_y[b] + j.F * j.F_yy(a, b);
    const double dt = det(g);
    if (!(std::fabs(dt) > 1e-14 * std::fmax(1e-300, max_abs(g) * max_abs(g))))
        throw Error(ErrorCode::SingularFundamentalTensor, "g_ij not invertible");
    Vec2<double> rhs;
    for (int l = 0; l < 2; ++l) {
        double acc = 0.0;
        for (int k = 0; k < 2; ++k) acc += (j.F_x[k] * j.F_y[l] + j.F * j.F_xy(k, l)) * v[k];
        rhs[l] = 2.0 * acc - 2.0 * j.F * j.F_x[l];
    }
    return 0.25 * (inverse(g) * rhs);
}

inline SprayProvider generic_provider(FinslerFunction F) {
    return [F = std::move(F)](const Point& p, const Direction& y) { return spray_generic(F, p, y); };
}

struct SprayData {
    Vec2<double> G;
    Vec2<double> G_alpha;
    double Q = 0.0;
    double Theta = 0.0;
    double Psi = 0.0;
    double Delta = 0.0;
    double alpha = 0.0;
    double s = 0.0;
};

// Denominators below this magnitude make the (alpha, beta) formula singular.
inline constexpr double kSingularDenominator = 1e-6;

inline SprayData spray_ab(const BetaDecomposition& d, const PhiFamily& family, const Direction& y) {
    const Vec2<double> v = y.vec();
    const ContractionsAt c = contractions(d, y);
    SprayData out;
    out.alpha = std::sqrt(quad(d.a(), v));
    if (!(out.alpha > 0.0)) throw Error(ErrorCode::DegenerateDirection, "alpha(y) = 0");
    out.s = dot(d.b, v) / out.alpha;
    const PhiJet j = phi_jet(family, out.s);
    const double s = out.s;
    const double den = j.phi - s * j.d1;
    if (std::fabs(den) < kSingularDenominator) throw Error(ErrorCode::SprayFormulaSingular, "phi - s phi' = 0");
    out.Q = j.d1 / den;
    const double dQ = j.d2 * j.phi / (den * den);
    out.Delta = 1.0 + s * out.Q + (d.b2 - s * s) * dQ;
    if (std::fabs(out.Delta) < kSingularDenominator) throw Error(ErrorCode::SprayFormulaSingular, "Delta = 0");
    out.Theta = (out.Q - s * dQ) / (2.0 * out.Delta);
    out.Psi = dQ / (2.0 * out.Delta);
    out.G_alpha = d.chr.spray(v);
    const double w = -2.0 * out.alpha * out.Q * c.s0 + c.r00;
    for (int i = 0; i < 2; ++i)
        out.G[i] = out.G_alpha[i] + out.alpha * out.Q * c.s0_up[i] + out.Theta * w * v[i] / out.alpha +
                   out.Psi * w * d.b_up[i];
    return out;
}

inline SprayData spray_ab(const MetricPair& pair, const PhiFamily& family, const Point& p, const Direction& y) {
    return spray_ab(decompose(pair, p), family, y);
}

inline SprayProvider ab_provider(MetricPair pair, PhiFamily family) {
    return [pair = std::move(pair), family = std::move(family)](const Point& p, const Direction& y) {
        return spray_ab(pair, family, p, y).G;
    };
}

// P = F_{x^m} y^m / (2F)
inline double projective_factor(const FinslerFunction& F, const Point& p, const Direction& y) {
    Vec2<D1> x{D1(p.x1), D1(p.x2)};
    x[0].d[0] = 1.0;
    x[1].d[1] = 1.0;
    const Vec2<D1> v{D1(y.y1), D1(y.y2)};
    const D1 f = F(x, v);
    if (!(f.v > 0.0)) throw Error(ErrorCode::NotPositive, "F must be positive");
    return (f.d[0] * y.y1 + f.d[1] * y.y2) / (2.0 * f.v);
}

struct TracePoint {
    double t = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
    double y1 = 0.0;
    double y2 = 0.0;
};

struct GeodesicTrace {
    std::vector<TracePoint> points;
    bool truncated = false;
    double chord_deviation = 0.0;  // max distance to the end-to-end chord / polyline length
};

inline constexpr int kDefaultTraceSteps = 512;

inline double chord_deviation(const std::vector<TracePoint>& pts) {
    if (pts.size() < 3) return 0.0;
    const double ax = pts.front().x1, ay = pts.front().x2;
    const double bx = pts.back().x1, by = pts.back().x2;
    double length = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        length += std::hypot(pts[i].x1 - pts[i - 1].x1, pts[i].x2 - pts[i - 1].x2);
    if (length == 0.0) return 0.0;
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double m = 0.0;
    for (const auto& q : pts) {
        double t = len2 > 0.0 ? ((q.x1 - ax) * dx + (q.x2 - ay) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        m = std::fmax(m, std::hypot(q.x1 - (ax + t * dx), q.x2 - (ay + t * dy)));
    }
    return m / length;
}

// Integrates x'' = -2 G(x, x') with RK4 in the F-arclength parameter.
inline GeodesicTrace geodesic_trace(const FinslerFunction& F, const SprayProvider& spray, const Point& p0,
                                    const Direction& y0, double arclen, int steps,
                                    const std::function<bool(const Point&)>& inside) {
    if (!inside(p0)) throw Error(ErrorCode::DomainExit, "initial point outside the domain");
    const double f0 = F(p0.vec(), y0.vec());
    if (!(f0 > 0.0)) throw Error(ErrorCode::NotPositive, "F(p0, y0) must be positive");
    using State = std::array<double, 4>;
    auto deriv = [&](const State& s) {
        const Point p{s[0], s[1]};
        if (!inside(p)) throw Error(ErrorCode::DomainExit, "trace left the domain");
        const Vec2<double> g = spray(p, {s[2], s[3]});
        return State{s[2], s[3], -2.0 * g[0], -2.0 * g[1]};
    };
    GeodesicTrace tr;
    State st{p0.x1, p0.x2, y0.y1 / f0, y0.y2 / f0};
    const double h = arclen / steps;
    tr.points.push_back({0.0, st[0], st[1], st[2], st[3]});
    for (int n = 0; n < steps; ++n) {
        try {
            auto add = [](const State& a, double k, const State& b) {
                return State{a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2], a[3] + k * b[3]};
            };
            const State k1 = deriv(st);
            const State k2 = deriv(add(st, 0.5 * h, k1));
            const State k3 = deriv(add(st, 0.5 * h, k2));
            const State k4 = deriv(add(st, h, k3));
            for (int i = 0; i < 4; ++i) st[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!inside({st[0], st[1]})) throw Error(ErrorCode::DomainExit, "trace left the domain");
        } catch (const Error&) {
            tr.truncated = true;
            break;
        }
        tr.points.push_back({(n + 1) * h, st[0], st[1], st[2], st[3]});
    }
    tr.chord_deviation = chord_deviation(tr.points);
    return tr;
}

inline GeodesicTrace geodesic_trace(const FinslerFunction& F, const Point& p0, const Direction& y0, double arclen,
                                    int steps, const std::function<bool(const Point&)>& inside) {
    return geodesic_trace(F, generic_provider(F), p0, y0, arclen, steps, inside);
}

}  // namespace finsler
