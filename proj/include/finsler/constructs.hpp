#pragma once
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "finsler/betacalc.hpp"
#include "finsler/fields.hpp"
#include "finsler/phi.hpp"
#include "finsler/quadrature.hpp"

namespace finsler {

// A metric pair together with the phi family it is meant for.
struct Construction {
    MetricPair pair;
    PhiFamily family;
};

// f(z) = u + i v with z = x1 + i x2.
struct HolomorphicPair {
    ScalarField u;
    ScalarField v;
};

inline HolomorphicPair identity_map() {
    return {[](const auto& x) { return x[0]; }, [](const auto& x) { return x[1]; }};
}

// max over the grid of |u1 - v2| and |u2 + v1|.
inline double cauchy_riemann_residual(const HolomorphicPair& f, const std::vector<Point>& pts) {
    double m = 0.0;
    for (const auto& p : pts) {
        const D1 u = x_gradient(f.u, p);
        const D1 v = x_gradient(f.v, p);
        m = std::fmax(m, std::fmax(std::fabs(u.d[0] - v.d[1]), std::fabs(u.d[1] + v.d[0])));
    }
    return m;
}

inline void require_nonvanishing(const HolomorphicPair& f, const std::vector<Point>& pts) {
    for (const auto& p : pts) {
        const double u = f.u(p.vec()), v = f.v(p.vec());
        if (!(u * u + v * v > 1e-14)) throw Error(ErrorCode::DegenerateForm, "u^2 + v^2 = 0 at a sampled point");
    }
}

inline std::vector<Point> box_points(const Box& box, int n = kDefaultGrid) {
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            pts.push_back({box.x1_min + (box.x1_max - box.x1_min) * i / (n - 1),
                           box.x2_min + (box.x2_max - box.x2_min) * j / (n - 1)});
    return pts;
}

// ---------------------------------------------------------------------------
// alpha +- beta^2/alpha in the (B, u, v) parametrization

inline MetricPair build_th2(ScalarField B, HolomorphicPair f, Sign sign, Box box, std::string name = "th2") {
    const double sg = sign_value(sign);
    const double upper = sign == Sign::Plus ? 1.0 : 0.5;
    const auto pts = box_points(box);
    for (const auto& p : pts) {
        const double b = B(p.vec());
        if (!(b > 0.0 && b < upper))
            throw Error(ErrorCode::RangeViolation, std::string("B must lie in (0, ") +
                                                       (sign == Sign::Plus ? "1" : "1/2") + ") on the domain");
    }
    require_nonvanishing(f, pts);
    MetricPair pair;
    pair.name = std::move(name);
    pair.domain = box;
    pair.beta = [B, f, sg](const auto& x) {
        using std::pow;
        using T = std::decay_t<decltype(x[0])>;
        const T b = B(x), u = f.u(x), v = f.v(x);
        const T k = b / (pow(1.0 + 2.0 * sg * b, 1.5) * (u * u + v * v));
        return Vec2<T>(k * u, k * v);
    };
    pair.alpha = [B, f, sg, beta = pair.beta](const auto& x) {
        using std::pow;
        using T = std::decay_t<decltype(x[0])>;
        const T b = B(x), u = f.u(x), v = f.v(x);
        const Vec2<T> bi = beta(x);
        const T conf = b / (u * u + v * v);
        const T k = -sg * 9.0 * (1.0 + sg * b + b * b);
        const T pre = 1.0 / pow(1.0 - sg * b, 3.0);
        return pre * (Mat2<T>(conf, T(0.0), T(0.0), conf) + k * outer(bi, bi));
    };
    validate(pair, make_grid(pair));
    return pair;
}

// ---------------------------------------------------------------------------
// c(B) = exp(int_0^B (k3 + k2 t) / (2 (1 + (k1+k3) t + k2 t^2)) dt)

struct CFunction {
    double k1 = 0.0, k2 = 0.0, k3 = 0.0;
    double tol = 1e-10;

    double denominator(double t) const { return 1.0 + (k1 + k3) * t + k2 * t * t; }
    double integrand(double t) const { return 0.5 * (k3 + k2 * t) / denominator(t); }

    // Denominator must stay positive on [0, B].
    void check_range(double B) const {
        const int n = 256;
        for (int i = 0; i <= n; ++i)
            if (!(denominator(B * i / n) > 0.0))
                throw Error(ErrorCode::ConstraintViolation, "1 + (k1+k3) t + k2 t^2 must be positive on [0, B]");
    }

    double value(double B) const {
        check_range(B);
        return std::exp(composite_gauss([&](double t) { return integrand(t); }, 0.0, B, tol).value);
    }

    template <class T>
    T operator()(const T& B) const {
        const double b = value_of(value_of(B));
        const double c = value(b);
        const double g = integrand(b);
        const double d = denominator(b);
        const double dg = 0.5 * (k2 * d - (k3 + k2 * b) * (k1 + k3 + 2.0 * k2 * b)) / (d * d);
        return lift(B, c, c * g, c * (g * g + dg));
    }
};

inline void check_excluded_triple(double k1, double k2, double k3) {
    if (std::fabs(k2 - (2 * k1 + 3 * k3) * (3 * k1 + 2 * k3) / 25.0) <= 1e-12)
        throw Error(ErrorCode::ConstraintViolation, "k2 = (2k1+3k3)(3k1+2k3)/25 is excluded");
    if (std::fabs(k2 - k1 * k3) <= 1e-12) throw Error(ErrorCode::ConstraintViolation, "k2 = k1 k3 is excluded");
}

// u1 - v2, u2 + v1 and v1 + sigma1 v - u sigma2; max abs over the points.
inline double pde_residual(const ScalarField& sigma, const HolomorphicPair& f, const std::vector<Point>& pts) {
    double m = cauchy_riemann_residual(f, pts);
    for (const auto& p : pts) {
        const D1 s = x_gradient(sigma, p);
        const D1 u = x_gradient(f.u, p);
        const D1 v = x_gradient(f.v, p);
        m = std::fmax(m, std::fabs(v.d[0] + s.d[0] * v.v - u.v * s.d[1]));
    }
    return m;
}

struct Th001Params {
    ScalarField B;
    HolomorphicPair f;
    double k1 = 0.0, k2 = 1.0, k3 = 0.0;
    Box box;
    std::string name = "th001";
    double pde_tol = 1e-7;
};

inline ScalarField th001_sigma(const Th001Params& prm) {
    const CFunction c{prm.k1, prm.k2, prm.k3};
    return [B = prm.B, f = prm.f, c](const auto& x) {
        using std::log;
        const auto b = B(x);
        const auto cb = c(b);
        const auto u = f.u(x), v = f.v(x);
        return 0.5 * log(b / (cb * cb * (u * u + v * v)));
    };
}

inline MetricPair build_th001(const Th001Params& prm) {
    check_excluded_triple(prm.k1, prm.k2, prm.k3);
    const auto pts = box_points(prm.box);
    const CFunction c{prm.k1, prm.k2, prm.k3};
    double bmax = 0.0;
    for (const auto& p : pts) {
        const double b = prm.B(p.vec());
        if (!(b > 0.0)) throw Error(ErrorCode::RangeViolation, "B must be positive on the domain");
        bmax = std::fmax(bmax, b);
    }
    c.check_range(bmax);
    require_nonvanishing(prm.f, pts);
    const double res = pde_residual(th001_sigma(prm), prm.f, pts);
    if (!(res <= prm.pde_tol))
        throw Error(ErrorCode::ConstraintViolation,
                    "(B, u, v) violates the compatibility PDEs, residual " + std::to_string(res));
    MetricPair pair;
    pair.name = prm.name;
    pair.domain = prm.box;
    pair.alpha = [B = prm.B, f = prm.f, c](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        const T b = B(x), u = f.u(x), v = f.v(x);
        const T cb = c(b);
        const T e = b / (cb * cb * (u * u + v * v));
        return Mat2<T>(e, T(0.0), T(0.0), e);
    };
    pair.beta = [B = prm.B, f = prm.f, c](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        const T b = B(x), u = f.u(x), v = f.v(x);
        const T k = b / (c(b) * (u * u + v * v));
        return Vec2<T>(k * u, k * v);
    };
    validate(pair, make_grid(pair));
    return pair;
}

// sigma = x1, u = (c2 sin x2 - c1 cos x2) e^{-x1}, v = (c1 sin x2 + c2 cos x2) e^{-x1}.
struct SpecialTriple {
    ScalarField sigma;
    HolomorphicPair f;
};

inline SpecialTriple special_triple(double c1, double c2) {
    SpecialTriple t;
    t.sigma = [](const auto& x) { return x[0]; };
    t.f.u = [c1, c2](const auto& x) {
        using std::cos;
        using std::exp;
        using std::sin;
        return (c2 * sin(x[1]) - c1 * cos(x[1])) * exp(-x[0]);
    };
    t.f.v = [c1, c2](const auto& x) {
        using std::cos;
        using std::exp;
        using std::sin;
        return (c1 * sin(x[1]) + c2 * cos(x[1])) * exp(-x[0]);
    };
    return t;
}

// With sigma = x1 the defining relation reduces to B / c(B)^2 = c1^2 + c2^2, so B is constant.
inline double special_triple_B(double k1, double k2, double k3, double c1, double c2) {
    const CFunction c{k1, k2, k3};
    const double K = c1 * c1 + c2 * c2;
    if (!(K > 0.0)) throw Error(ErrorCode::DegenerateForm, "c1 = c2 = 0");
    auto g = [&](double B) {
        const double cb = c.value(B);
        return B / (cb * cb) - K;
    };
    double hi = 1.0;
    while (g(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw Error(ErrorCode::ConstraintViolation, "no B solves B / c(B)^2 = c1^2 + c2^2");
    }
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(g, 0.0, hi, -K, g(hi),
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------------------
// Projectively flat example with non-closed beta

inline Construction build_pf_example(double c1, double c2, double c3, double c4, Sign sign) {
    if (!(c3 > 0.0)) throw Error(ErrorCode::RangeViolation, "c3 must be positive");
    const double sg = sign_value(sign);
    auto D = [=](const auto& x) { return c3 - sg * (x[0] + c1) * (x[0] + c1) - sg * (x[1] + c2) * (x[1] + c2); };
    const double h = 0.5 * std::sqrt(c3);
    Box box{-c1 - h, -c1 + h, -c2 - h, -c2 + h};
    MetricPair pair;
    pair.name = std::string("pf_example") + sign_name(sign);
    pair.domain = box;
    pair.excluded_loci.push_back({"D <= 0", ScalarField(D), true});
    pair.excluded_loci.push_back(
        {"beta = 0", ScalarField([=](const auto& x) { return (x[0] + c1) * (x[0] + c1) + (x[1] + c2) * (x[1] + c2); }),
         false});
    pair.alpha = [=](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        const T d = D(x);
        const T e = std::exp(2.0 * c4) * d * d;
        return Mat2<T>(e, T(0.0), T(0.0), e);
    };
    pair.beta = [=](const auto& x) {
        using std::sqrt;
        using T = std::decay_t<decltype(x[0])>;
        const T d = D(x);
        // e^sigma * (+-1/sqrt2) / sqrt(D) = +-e^{c4} sqrt(D / 2)
        const T k = sg * std::exp(c4) * sqrt(0.5 * d);
        return Vec2<T>(k * (x[1] + c2), -k * (x[0] + c1));
    };
    bool any = false;
    for (const auto& p : box_points(box))
        if (D(p.vec()) > 0.0) any = true;
    if (!any) throw Error(ErrorCode::RangeViolation, "empty admissible domain");
    validate(pair, make_grid(pair));
    return {pair, QuadraticFamily{sign}};
}

// ---------------------------------------------------------------------------
// Constant-b conformal families

// Left side of the closedness criterion; nonzero iff beta is not closed.
inline double nonclosed_indicator(const ScalarField& sigma, const ScalarField& xi, const ScalarField& eta,
                                  const Point& p) {
    const D1 s = x_gradient(sigma, p), a = x_gradient(xi, p), e = x_gradient(eta, p);
    const double X = a.v, E = e.v;
    return (X * X + E * E) * (X * s.d[1] - E * s.d[0]) - X * X * e.d[0] - X * E * e.d[1] + X * E * a.d[0] +
           E * E * a.d[1];
}

// tau~ of r_ij = 2 tau~ (b^2 a_ij - b_i b_j) - (b_i s_j + b_j s_i) / b^2.
inline double tau_tilde(const ScalarField& sigma, const ScalarField& xi, const ScalarField& eta, double b,
                        const Point& p) {
    const D1 s = x_gradient(sigma, p), a = x_gradient(xi, p), e = x_gradient(eta, p);
    const double X = a.v, E = e.v, n2 = X * X + E * E;
    const double num = n2 * (X * s.d[0] + E * s.d[1]) - X * E * e.d[0] + X * X * e.d[1] + E * E * a.d[0] -
                       X * E * a.d[1];
    return 0.5 * num / (b * std::exp(s.v) * std::pow(n2, 1.5));
}

inline std::vector<ExcludedLocus> origin_locus() {
    return {{"origin", ScalarField([](const auto& x) { return x[0] * x[0] + x[1] * x[1]; }), false}};
}

inline Construction build_singular_family(ScalarField sigma, ScalarField xi, ScalarField eta, double b,
                                          PhiFamily variant, Box box, std::vector<ExcludedLocus> loci = {},
                                          std::string name = "singular") {
    auto pair = conformal_pair(std::move(sigma), std::move(xi), std::move(eta), b, box, std::move(loci),
                               std::move(name));
    return {std::move(pair), std::move(variant)};
}

inline ScalarField rotation_xi() {
    return [](const auto& x) { return x[1]; };
}
inline ScalarField rotation_eta() {
    return [](const auto& x) { return -x[0]; };
}

inline ScalarField log_radius_sigma(double e) {
    return [e](const auto& x) {
        using std::log;
        return e * log(x[0] * x[0] + x[1] * x[1]);
    };
}

inline const Box kSingularBox{0.3, 1.3, 0.2, 1.2};

// sigma = (m - 1/2) ln|x|^2 with the integer-power phi.
inline Construction build_ex01(int m, double b = 1.0, double c = 1.0, double k = 0.0, Box box = kSingularBox) {
    return build_singular_family(log_radius_sigma(m - 0.5), rotation_xi(), rotation_eta(), b,
                                 IntegerPower{b, c, k, m}, box, origin_locus(), "ex01_m" + std::to_string(m));
}

// sigma = (m - 1) ln|x|^2 with the half-power phi.
inline Construction build_ex02(int m, double b = 1.0, double c = 0.5, double k = 0.0, Box box = kSingularBox) {
    return build_singular_family(log_radius_sigma(m - 1.0), rotation_xi(), rotation_eta(), b, HalfPower{b, c, k, m},
                                 box, origin_locus(), "ex02_m" + std::to_string(m));
}

// ---------------------------------------------------------------------------
// alpha = e^sigma |y|, beta = e^sigma (x2 y1 - x1 y2), sigma = -3/2 ln(1 +- 2|x|^2) + c

inline Construction build_closing_example(Sign sign, double c = 0.0, Box box = {-0.3, 0.3, -0.3, 0.3}) {
    const double sg = sign_value(sign);
    auto sigma = [=](const auto& x) {
        using std::log;
        return -1.5 * log(1.0 + 2.0 * sg * (x[0] * x[0] + x[1] * x[1])) + c;
    };
    MetricPair pair;
    pair.name = std::string("closing_example") + sign_name(sign);
    pair.domain = box;
    if (sign == Sign::Minus)
        pair.excluded_loci.push_back(
            {"1 - 2|x|^2 <= 0", ScalarField([](const auto& x) { return 1.0 - 2.0 * (x[0] * x[0] + x[1] * x[1]); }),
             true});
    pair.alpha = [=](const auto& x) {
        using std::exp;
        using T = std::decay_t<decltype(x[0])>;
        const T e = exp(2.0 * sigma(x));
        return Mat2<T>(e, T(0.0), T(0.0), e);
    };
    pair.beta = [=](const auto& x) {
        using std::exp;
        using T = std::decay_t<decltype(x[0])>;
        const T e = exp(sigma(x));
        return Vec2<T>(e * x[1], -e * x[0]);
    };
    validate(pair, make_grid(pair));
    return {pair, QuadraticFamily{sign}};
}

// ---------------------------------------------------------------------------
// Deformations

// eta(b^2) of the alpha deformation; a series for small b^2 avoids cancellation.
template <class T>
T th2_eta(const T& B, double sg) {
    using std::pow;
    if (std::fabs(value_of(value_of(B))) < 1e-3) {
        const T B2 = B * B;
        return sg * 9.0 - 18.0 * B + sg * 49.5 * B2 - 117.0 * B2 * B + sg * (2115.0 / 8.0) * B2 * B2;
    }
    const T p = pow(1.0 + 2.0 * sg * B, 1.5);
    return 9.0 / (8.0 * B) * (p - (1.0 - 2.0 * sg * B + 4.0 * B * B) / p);
}

template <class T>
T th2_xi(const T& B, double sg) {
    using std::pow;
    return pow(1.0 - sg * B, 3.0) / pow(1.0 + 2.0 * sg * B, 1.5);
}

// alpha~^2 = xi(b^2) alpha^2 + eta(b^2) beta^2, beta~ = beta.
inline MetricPair deform_th2(const MetricPair& pair, Sign sign) {
    const double sg = sign_value(sign);
    for (const auto& p : make_grid(pair).points) {
        const double b2 = beta_norm2(pair, p);
        if (!(1.0 - sg * b2 > 0.0 && 1.0 + 2.0 * sg * b2 > 0.0))
            throw Error(ErrorCode::RangeViolation, "b^2 outside the range where the deformation is defined");
    }
    MetricPair out = pair;
    out.name = pair.name + "_deformed";
    out.alpha = [pair, sg](const auto& x) {
        const auto a = pair.a(x);
        const auto b = pair.b(x);
        const auto b2 = quad(inverse(a), b);
        return th2_xi(b2, sg) * a + th2_eta(b2, sg) * outer(b, b);
    };
    validate(out, make_grid(out));
    return out;
}

// beta~ = beta / c with constant c.
inline MetricPair deform_th001(const MetricPair& pair, double c) {
    if (!(c > 0.0)) throw Error(ErrorCode::RangeViolation, "c must be positive");
    MetricPair out = pair;
    out.name = pair.name + "_deformed";
    out.beta = [pair, c](const auto& x) { return (1.0 / c) * pair.b(x); };
    return out;
}

// beta~ = beta / c(b^2) with c from the (k1, k2, k3) integral.
inline MetricPair deform_th001(const MetricPair& pair, double k1, double k2, double k3) {
    const CFunction c{k1, k2, k3};
    for (const auto& p : make_grid(pair).points) c.check_range(beta_norm2(pair, p));
    MetricPair out = pair;
    out.name = pair.name + "_deformed";
    out.beta = [pair, c](const auto& x) {
        const auto b = pair.b(x);
        const auto cb = c(beta_norm2(pair, x));
        return (1.0 / cb) * b;
    };
    return out;
}

}  // namespace finsler
