#pragma once
#include <string>
#include <vector>

#include "finsler/finsler.hpp"

namespace fx {

using namespace finsler;

inline MetricPair flat_pair(std::string name, OneFormField beta, Box box = {-0.5, 0.5, -0.5, 0.5}) {
    MetricPair p;
    p.name = std::move(name);
    p.domain = box;
    p.alpha = [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return Mat2<T>::identity();
    };
    p.beta = std::move(beta);
    return p;
}

inline MetricPair euclidean(Box box = {-1, 1, -1, 1}) {
    return flat_pair("euclidean", [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return Vec2<T>(T(0.0), T(0.0));
    }, box);
}

// beta = x1 y1 (closed) or x2 y1 (not closed)
inline MetricPair randers_closed() {
    return flat_pair("randers_closed", [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return Vec2<T>(x[0], T(0.0));
    });
}
inline MetricPair randers_nonclosed() {
    return flat_pair("randers_nonclosed", [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return Vec2<T>(x[1], T(0.0));
    });
}

inline PhiFamily randers_family() { return RandersType{1.0, 0.0}; }

// Conformal alpha with sigma = x1, scaled rotational beta.
inline MetricPair conformal_rotation() {
    MetricPair p;
    p.name = "conformal_rotation";
    p.domain = {0.2, 0.6, 0.2, 0.6};
    p.alpha = [](const auto& x) {
        using std::exp;
        using T = std::decay_t<decltype(x[0])>;
        const T e = exp(2.0 * x[0]);
        return Mat2<T>(e, T(0.0), T(0.0), e);
    };
    p.beta = [](const auto& x) { return Vec2<std::decay_t<decltype(x[0])>>(0.5 * x[1], -0.3 * x[0]); };
    return p;
}

inline Construction th2_quarter() {
    ScalarField B = [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return T(0.25);
    };
    return {build_th2(B, identity_map(), Sign::Plus, {0.2, 1.0, 0.2, 1.0}), QuadraticFamily{Sign::Plus}};
}

inline Construction th2_varying() {
    ScalarField B = [](const auto& x) { return 0.2 + 0.1 * x[0] * x[1]; };
    return {build_th2(B, identity_map(), Sign::Plus, {0.2, 1.0, 0.2, 1.0}, "th2_varying"),
            QuadraticFamily{Sign::Plus}};
}

inline Th001Params th001_radial_params() {
    Th001Params p;
    p.B = [](const auto& x) { return 0.3 + 0.1 * (x[0] * x[0] + x[1] * x[1]); };
    p.f = identity_map();
    p.box = {0.2, 1.0, 0.2, 1.0};
    return p;
}

inline double bmax_on_grid(const MetricPair& pair) {
    double m = 0.0;
    for (const auto& q : make_grid(pair).points) m = std::fmax(m, std::sqrt(beta_norm2(pair, q)));
    return m;
}

inline Construction th001_radial() {
    MetricPair pair = build_th001(th001_radial_params());
    return {pair, make_quartic_ode(0.0, 1.0, 0.0, 0.0, 1.05 * bmax_on_grid(pair) + 1e-3)};
}

struct Named {
    std::string name;
    Construction c;
};

// Every (pair, family) combination the toolkit ships.
inline std::vector<Named> shipped() {
    std::vector<Named> out;
    out.push_back({"randers_closed", {randers_closed(), randers_family()}});
    out.push_back({"randers_nonclosed", {randers_nonclosed(), randers_family()}});
    out.push_back({"square_root_flat", {randers_nonclosed(), SquareRootFamily{0.5, 1.0}}});
    out.push_back({"closing_plus", build_closing_example(Sign::Plus)});
    out.push_back({"closing_minus", build_closing_example(Sign::Minus)});
    out.push_back({"pf_plus", build_pf_example(0, 0, 1, 0, Sign::Plus)});
    out.push_back({"pf_minus", build_pf_example(0, 0, 1, 0, Sign::Minus)});
    out.push_back({"ex01_m1", build_ex01(1)});
    out.push_back({"ex01_m2", build_ex01(2)});
    out.push_back({"ex02_m1", build_ex02(1)});
    out.push_back({"ex02_m2", build_ex02(2)});
    out.push_back({"th2", th2_quarter()});
    out.push_back({"th001", th001_radial()});
    return out;
}

}  // namespace fx
