#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "finsler/dual.hpp"
#include "finsler/error.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/taylor.hpp"

namespace finsler {

enum class Sign { Plus, Minus };

inline double sign_value(Sign s) { return s == Sign::Plus ? 1.0 : -1.0; }
inline const char* sign_name(Sign s) { return s == Sign::Plus ? "+" : "-"; }

struct PhiJet {
    double phi = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

class QuarticOdeSolution;

// phi = eps s + sqrt(1 + k s^2)
struct RandersType {
    double eps = 0.0;
    double k = 1.0;
};

// {1 + (k1+k3) s^2 + k2 s^4} phi'' = (k1 + k2 s^2)(phi - s phi'), phi(0) = 1, phi'(0) = eps.
struct QuarticODE {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double eps = 0.0;
    double s_max = 1.0;
    std::shared_ptr<const QuarticOdeSolution> solution;
};

// phi = sqrt(1 - k s^2) + c s^2 / sqrt(1 - k s^2)
struct SquareRootFamily {
    double k = 0.0;
    double c = 1.0;
};

// phi = 1 +- s^2, i.e. F = alpha +- beta^2 / alpha.
struct QuadraticFamily {
    Sign sign = Sign::Plus;
};

// phi = sqrt(b^2-s^2)/b + sqrt(b^2-s^2) int_0^s c/(b^2-t^2)^{3/2} (t^2/(1-k t^2))^m dt
struct IntegerPower {
    double b = 1.0;
    double c = 1.0;
    double k = 0.0;
    int m = 1;
};

// Same with exponent m - 1/2; (t^2)^{m-1/2} is read as |t|^{2m-1}.
struct HalfPower {
    double b = 1.0;
    double c = 1.0;
    double k = 0.0;
    int m = 1;
};

// phi = (b + ctilde s^2) / sqrt(b^2 - s^2)
struct SingularB {
    double b = 1.0;
    double ctilde = 0.0;
};

using PhiFamily =
    std::variant<RandersType, QuarticODE, SquareRootFamily, QuadraticFamily, IntegerPower, HalfPower, SingularB>;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ---------------------------------------------------------------------------
// Quartic ODE: fixed-step RK4 with dense output by a single partial step.

class QuarticOdeSolution {
public:
    static constexpr int kDefaultSteps = 2048;

    QuarticOdeSolution(double k1, double k2, double k3, double eps, double s_max, int steps = kDefaultSteps)
        : k1_(k1), k2_(k2), k3_(k3), s_max_(s_max), steps_(steps), h_(s_max / steps) {
        if (!(s_max > 0.0) || steps < 2) throw Error(ErrorCode::RangeViolation, "ODE interval must be nonempty");
        if (min_coefficient(s_max) <= 1e-10)
            throw Error(ErrorCode::SingularODE, "1 + (k1+k3) s^2 + k2 s^4 vanishes on the interval");
        nodes_.assign(2 * steps + 1, State{});
        nodes_[steps] = {1.0, eps};
        for (int i = 0; i < steps; ++i) {
            nodes_[steps + i + 1] = step(s_at(steps + i), nodes_[steps + i], h_);
            nodes_[steps - i - 1] = step(s_at(steps - i), nodes_[steps - i], -h_);
        }
        for (const auto& n : nodes_)
            if (!std::isfinite(n[0]) || !std::isfinite(n[1]))
                throw Error(ErrorCode::NumericalBlowup, "ODE solution diverged");
    }

    double s_max() const { return s_max_; }

    // 1 + (k1+k3) s^2 + k2 s^4
    template <class T>
    T coefficient(const T& s) const {
        const T t = s * s;
        return 1.0 + (k1_ + k3_) * t + k2_ * t * t;
    }

    // Minimum of the leading coefficient over |s| <= r, exact (quadratic in s^2).
    double min_coefficient(double r) const {
        auto q = [&](double t) { return 1.0 + (k1_ + k3_) * t + k2_ * t * t; };
        const double tmax = r * r;
        double m = std::fmin(q(0.0), q(tmax));
        if (k2_ != 0.0) {
            const double tv = -(k1_ + k3_) / (2.0 * k2_);
            if (tv > 0.0 && tv < tmax) m = std::fmin(m, q(tv));
        }
        return m;
    }

    PhiJet eval(double s) const {
        if (!(std::fabs(s) <= s_max_)) throw Error(ErrorCode::DomainExit, "s outside the ODE interval");
        const auto [i, ds] = locate(s);
        const State st = step(s_at(i), nodes_[i], ds);
        return {st[0], st[1], second(s, st[0], st[1])};
    }

    // Plug-back residual of the dense output: its s-derivative, obtained by
    // differentiating the partial RK4 step in its length, substituted back
    // into the first-order system.
    double residual(double s) const {
        const auto [i, ds] = locate(s);
        Dual<double, 1> len(ds);
        len.d[0] = 1.0;
        const auto st = step(Dual<double, 1>(s_at(i)), nodes_[i], len);
        const double phi = st[0].v, dphi = st[0].d[0];
        const double psi = st[1].v, dpsi = st[1].d[0];
        const double r1 = dphi - psi;
        const double r2 = coefficient(s) * dpsi - (k1_ + k2_ * s * s) * (phi - s * psi);
        return std::fmax(std::fabs(r1), std::fabs(r2));
    }

    double max_residual(int checkpoints) const {
        double r = 0.0;
        for (int j = 0; j < checkpoints; ++j) {
            // Offset from the node lattice so the partial step is nontrivial.
            const double s = -s_max_ + (2.0 * s_max_) * (j + 0.37) / checkpoints;
            r = std::fmax(r, residual(s));
        }
        return r;
    }

private:
    using State = std::array<double, 2>;

    double s_at(int i) const { return -s_max_ + i * h_; }

    std::pair<int, double> locate(double s) const {
        int i = static_cast<int>(std::lround((s + s_max_) / h_));
        i = std::clamp(i, 0, 2 * steps_);
        return {i, s - s_at(i)};
    }

    double second(double s, double phi, double dphi) const {
        return (k1_ + k2_ * s * s) * (phi - s * dphi) / coefficient(s);
    }

    template <class T>
    std::array<T, 2> rhs(const T& s, const std::array<T, 2>& y) const {
        return {y[1], (k1_ + k2_ * s * s) * (y[0] - s * y[1]) / coefficient(s)};
    }

    template <class T, class Y>
    std::array<T, 2> step(const T& s, const Y& y0, const T& h) const {
        const std::array<T, 2> y{T(y0[0]), T(y0[1])};
        auto axpy = [](const std::array<T, 2>& a, const T& k, const std::array<T, 2>& b) {
            return std::array<T, 2>{a[0] + k * b[0], a[1] + k * b[1]};
        };
        const T half = 0.5 * h;
        const auto f1 = rhs(s, y);
        const auto f2 = rhs(T(s + half), axpy(y, half, f1));
        const auto f3 = rhs(T(s + half), axpy(y, half, f2));
        const auto f4 = rhs(T(s + h), axpy(y, h, f3));
        const T w = h / 6.0;
        return {y[0] + w * (f1[0] + 2.0 * f2[0] + 2.0 * f3[0] + f4[0]),
                y[1] + w * (f1[1] + 2.0 * f2[1] + 2.0 * f3[1] + f4[1])};
    }

    double k1_, k2_, k3_, s_max_;
    int steps_;
    double h_;
    std::vector<State> nodes_;
};

inline std::shared_ptr<const QuarticOdeSolution> solve_quartic_ode(double k1, double k2, double k3, double eps,
                                                               double s_max, double tol = 1e-8) {
    auto sol = std::make_shared<const QuarticOdeSolution>(k1, k2, k3, eps, s_max);
    const double r = sol->max_residual(50);
    if (!(r <= tol)) throw Error(ErrorCode::NumericalBlowup, "ODE plug-back residual above tolerance");
    return sol;
}

inline QuarticODE make_quartic_ode(double k1, double k2, double k3, double eps = 0.0, double s_max = 1.0) {
    return {k1, k2, k3, eps, s_max, solve_quartic_ode(k1, k2, k3, eps, s_max)};
}

// ---------------------------------------------------------------------------
// The (b^2 - t^2)^{-3/2} integrals, with t = b sin(theta).

struct PowerIntegrand {
    double b = 1.0;
    double c = 1.0;
    double k = 0.0;
    double p = 1.0;  // m or m - 1/2

    // (t^2 / (1 - k t^2))^p
    double g(double t) const { return std::pow(t * t / (1.0 - k * t * t), p); }
    double dg(double t) const {
        if (t == 0.0) return 0.0;
        const double u = 1.0 - k * t * t;
        return 2.0 * p * t * std::pow(t * t, p - 1.0) / std::pow(u, p + 1.0);
    }
    double h(double t) const { return c * g(t) / std::pow(b * b - t * t, 1.5); }
    double dh(double t) const {
        const double w2 = b * b - t * t;
        return c * (dg(t) / std::pow(w2, 1.5) + 3.0 * t * g(t) / std::pow(w2, 2.5));
    }
};

inline PowerIntegrand integrand_of(const IntegerPower& f) { return {f.b, f.c, f.k, double(f.m)}; }
inline PowerIntegrand integrand_of(const HalfPower& f) { return {f.b, f.c, f.k, f.m - 0.5}; }

// int_0^s h(t) dt; the integrand is even, so the integral is odd in s.
inline QuadratureResult singular_power_integral(const PowerIntegrand& in, double s, double tol = 1e-13) {
    if (!(std::fabs(s) < in.b)) throw Error(ErrorCode::DomainExit, "|s| must be below b");
    if (!(1.0 - in.k * s * s > 0.0)) throw Error(ErrorCode::DomainExit, "1 - k t^2 must stay positive");
    if (s == 0.0) return {0.0, 0.0, 0};
    const double theta1 = std::asin(std::fabs(s) / in.b);
    auto f = [&](double th) {
        const double t = in.b * std::sin(th);
        const double cs = std::cos(th);
        return in.c * in.g(t) / (in.b * in.b * cs * cs);
    };
    QuadratureResult r = composite_gauss(f, 0.0, theta1, tol);
    if (s < 0.0) r.value = -r.value;
    return r;
}

namespace detail {

template <class T>
T closed_form(const RandersType& f, const T& s) {
    using std::sqrt;
    return f.eps * s + sqrt(1.0 + f.k * s * s);
}
template <class T>
T closed_form(const SquareRootFamily& f, const T& s) {
    using std::sqrt;
    const T u = 1.0 - f.k * s * s;
    return sqrt(u) + f.c * s * s / sqrt(u);
}
template <class T>
T closed_form(const QuadraticFamily& f, const T& s) {
    return 1.0 + sign_value(f.sign) * s * s;
}
template <class T>
T closed_form(const SingularB& f, const T& s) {
    using std::sqrt;
    return (f.b + f.ctilde * s * s) / sqrt(f.b * f.b - s * s);
}

template <class Fam>
PhiJet closed_jet(const Fam& f, double s) {
    using DD = Dual<Dual<double, 1>, 1>;
    DD x;
    x.v = Dual<double, 1>(s);
    x.v.d[0] = 1.0;
    x.d[0] = Dual<double, 1>(1.0);
    const DD r = closed_form(f, x);
    return {r.v.v, r.v.d[0], r.d[0].d[0]};
}

inline PhiJet power_jet(const PowerIntegrand& in, double s) {
    const double I = singular_power_integral(in, s).value;
    const double w = std::sqrt(in.b * in.b - s * s);
    const double dw = -s / w;
    const double d2w = -in.b * in.b / (w * w * w);
    const double base = 1.0 / in.b + I;
    const double dI = in.h(s);
    const double d2I = in.dh(s);
    return {w * base, dw * base + w * dI, d2w * base + 2.0 * dw * dI + w * d2I};
}

}  // namespace detail

// Largest |s| at which the family may be evaluated (exclusive).
inline double s_bound(const PhiFamily& fam) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(Overloaded{
                          [&](const RandersType& f) { return f.k < 0.0 ? 1.0 / std::sqrt(-f.k) : inf; },
                          [&](const QuarticODE& f) { return std::nextafter(f.s_max, inf); },
                          [&](const SquareRootFamily& f) { return f.k > 0.0 ? 1.0 / std::sqrt(f.k) : inf; },
                          [&](const QuadraticFamily&) { return inf; },
                          [&](const IntegerPower& f) {
                              return f.k > 0.0 ? std::fmin(f.b, 1.0 / std::sqrt(f.k)) : f.b;
                          },
                          [&](const HalfPower& f) {
                              return f.k > 0.0 ? std::fmin(f.b, 1.0 / std::sqrt(f.k)) : f.b;
                          },
                          [&](const SingularB& f) { return f.b; },
                      },
                      fam);
}

inline PhiJet phi_jet(const PhiFamily& fam, double s) {
    if (!(std::fabs(s) < s_bound(fam))) throw Error(ErrorCode::DomainExit, "s outside the family's interval");
    PhiJet j = std::visit(Overloaded{
                              [&](const QuarticODE& f) {
                                  if (!f.solution) throw Error(ErrorCode::SingularODE, "ODE family not solved");
                                  return f.solution->eval(s);
                              },
                              [&](const IntegerPower& f) { return detail::power_jet(integrand_of(f), s); },
                              [&](const HalfPower& f) { return detail::power_jet(integrand_of(f), s); },
                              [&](const auto& f) { return detail::closed_jet(f, s); },
                          },
                          fam);
    if (!std::isfinite(j.phi) || !std::isfinite(j.d1) || !std::isfinite(j.d2))
        throw Error(ErrorCode::NumericalBlowup, "non-finite phi jet");
    return j;
}

inline std::string family_name(const PhiFamily& fam) {
    return std::visit(Overloaded{
                          [](const RandersType&) { return std::string("randers"); },
                          [](const QuarticODE&) { return std::string("quartic_ode"); },
                          [](const SquareRootFamily&) { return std::string("square_root"); },
                          [](const QuadraticFamily&) { return std::string("quadratic"); },
                          [](const IntegerPower&) { return std::string("integer_power"); },
                          [](const HalfPower&) { return std::string("half_power"); },
                          [](const SingularB&) { return std::string("singular_b"); },
                      },
                      fam);
}

// Side conditions on the parameters; throws RangeViolation.
inline void check_family(const PhiFamily& fam) {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::RangeViolation, m); };
    std::visit(Overloaded{
                   [&](const RandersType&) {},
                   [&](const QuarticODE& f) {
                       if (!(f.s_max > 0.0)) fail("quartic_ode needs s_max > 0");
                   },
                   [&](const SquareRootFamily& f) {
                       if (f.c == 0.0) fail("square_root needs c != 0");
                   },
                   [&](const QuadraticFamily&) {},
                   [&](const IntegerPower& f) {
                       if (f.m < 1) fail("integer_power needs integer m >= 1");
                       if (!(f.b > 0.0)) fail("integer_power needs b > 0");
                   },
                   [&](const HalfPower& f) {
                       if (f.m < 1) fail("half_power needs integer m >= 1");
                       if (!(f.b > 0.0)) fail("half_power needs b > 0");
                   },
                   [&](const SingularB& f) {
                       if (!(f.b > 0.0)) fail("singular_b needs b > 0");
                       if (std::fabs(f.ctilde * f.b + 1.0) < 1e-12) fail("singular_b needs ctilde != -1/b");
                   },
               },
               fam);
    if (std::fabs(phi_jet(fam, 0.0).phi - 1.0) > 1e-10) fail("phi(0) != 1");
}

// ---------------------------------------------------------------------------
// Taylor data and the (k1, k2, k3) map.

struct TaylorData {
    std::array<double, 7> a{};  // a_i = phi^(i)(0) / i!
};

inline TaylorData taylor_coefficients(const PhiFamily& fam) {
    using T7 = Taylor<7>;
    const T7 s = T7::variable();
    auto power_series = [&](const PowerIntegrand& in, int n) {
        // h = c t^n (1 - k t^2)^{-p} (b^2 - t^2)^{-3/2}, one-sided (t > 0) for odd n
        const T7 h = in.c * monomial<7>(n) * pow(T7(1.0) - in.k * s * s, -in.p) *
                     pow(T7(in.b * in.b) - s * s, -1.5);
        return sqrt(T7(in.b * in.b) - s * s) * (T7(1.0 / in.b) + integrate(h));
    };
    const T7 series = std::visit(Overloaded{
                                     [&](const QuarticODE& f) {
                                         T7 r;
                                         r.c[0] = 1.0;
                                         r.c[1] = f.eps;
                                         const double a = f.k1 + f.k3;
                                         for (int n = 0; n + 2 < 7; ++n) {
                                             const double an = r.c[n];
                                             const double am2 = n >= 2 ? r.c[n - 2] : 0.0;
                                             const double rhs = f.k1 * (1 - n) * an + f.k2 * (3 - n) * am2;
                                             const double lhs = a * n * (n - 1) * an +
                                                                f.k2 * (n - 2) * (n - 3) * am2;
                                             r.c[n + 2] = (rhs - lhs) / ((n + 2) * (n + 1));
                                         }
                                         return r;
                                     },
                                     [&](const IntegerPower& f) { return power_series(integrand_of(f), 2 * f.m); },
                                     [&](const HalfPower& f) {
                                         return power_series(integrand_of(f), 2 * f.m - 1);
                                     },
                                     [&](const auto& f) { return detail::closed_form(f, s); },
                                 },
                                 fam);
    TaylorData d;
    d.a = series.c;
    return d;
}

struct KTriple {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
};

inline KTriple taylor_to_k(const TaylorData& t) {
    const double a2 = t.a[2], a4 = t.a[4], a6 = t.a[6];
    const double den = 2.0 * a4 + a2 * a2;
    if (std::fabs(den) <= 1e-12 * std::fmax(1.0, a2 * a2))
        throw Error(ErrorCode::RandersTypeDegenerate, "2 a4 + a2^2 = 0: phi is of Randers type");
    return {2.0 * a2, 2.0 * (a4 * a2 * a2 - 5.0 * a2 * a6 + 12.0 * a4 * a4) / den,
            -(11.0 * a2 * a4 + 5.0 * a6 + 3.0 * a2 * a2 * a2) / den};
}

inline KTriple taylor_to_k(const PhiFamily& fam) { return taylor_to_k(taylor_coefficients(fam)); }

// ---------------------------------------------------------------------------
// Regularity: min over |s| <= rho of phi - s phi' + (rho^2 - s^2) phi''.

inline double regularity_margin(const PhiFamily& fam, double rho, int samples = 2048) {
    if (!(rho >= 0.0) || !(rho < s_bound(fam))) throw Error(ErrorCode::DomainExit, "rho outside family domain");
    auto expr = [&](double s) {
        const PhiJet j = phi_jet(fam, s);
        return j.phi - s * j.d1 + (rho * rho - s * s) * j.d2;
    };
    if (rho == 0.0) return expr(0.0);
    int best = 0;
    double best_v = INFINITY;
    std::vector<double> v(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        v[i] = expr(-rho + 2.0 * rho * i / samples);
        if (v[i] < best_v) {
            best_v = v[i];
            best = i;
        }
    }
    // Golden-section refinement inside the bracketing cell pair.
    double lo = -rho + 2.0 * rho * std::max(0, best - 1) / samples;
    double hi = -rho + 2.0 * rho * std::min(samples, best + 1) / samples;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = expr(c), fd = expr(d);
    for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = expr(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = expr(d);
        }
    }
    return std::fmin(best_v, std::fmin(fc, fd));
}

// Supremum of rho in (0, rho_cap) with positive margin, by bisection.
// Returns rho_cap when the margin stays positive all the way.
inline double regularity_radius(const PhiFamily& fam, double rho_cap, double tol = 1e-12) {
    const double cap = std::fmin(rho_cap, std::nextafter(s_bound(fam), 0.0));
    if (regularity_margin(fam, 0.0) <= 0.0) return 0.0;
    if (regularity_margin(fam, cap) > 0.0) return cap;
    double lo = 0.0, hi = cap;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (regularity_margin(fam, mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace finsler
