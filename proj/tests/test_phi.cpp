#include <gtest/gtest.h>

#include "finsler/finsler.hpp"
#include "support/fd_oracle.hpp"

using namespace finsler;

namespace {

std::vector<std::pair<std::string, PhiFamily>> families() {
    return {
        {"randers", RandersType{0.5, 0.3}},
        {"quartic_ode", make_quartic_ode(0.5, 0.2, -0.4, 0.1, 0.8)},
        {"square_root", SquareRootFamily{0.4, 1.0}},
        {"quadratic+", QuadraticFamily{Sign::Plus}},
        {"quadratic-", QuadraticFamily{Sign::Minus}},
        {"integer_power", IntegerPower{1.0, 1.0, 0.0, 1}},
        {"integer_power_k", IntegerPower{1.0, 0.7, 0.5, 2}},
        {"half_power", HalfPower{1.0, 0.5, 0.0, 2}},
        {"singular_b", SingularB{0.8, 0.3}},
    };
}

}  // namespace

TEST(Phi, ValueAtZeroIsOne) {
    for (const auto& [name, f] : families()) EXPECT_NEAR(phi_jet(f, 0.0).phi, 1.0, 1e-10) << name;
}

TEST(Phi, SquareRootAtZero) {
    const PhiJet j = phi_jet(SquareRootFamily{0.4, 1.3}, 0.0);
    EXPECT_NEAR(j.phi, 1.0, 1e-15);
    EXPECT_NEAR(j.d1, 0.0, 1e-15);
    EXPECT_NEAR(j.d2, 2 * 1.3 - 0.4, 1e-12);
}

TEST(Phi, QuadraticPlus) {
    const PhiJet j = phi_jet(QuadraticFamily{Sign::Plus}, 0.5);
    EXPECT_DOUBLE_EQ(j.phi, 1.25);
    EXPECT_DOUBLE_EQ(j.d1, 1.0);
    EXPECT_DOUBLE_EQ(j.d2, 2.0);
}

TEST(Phi, IntegerPowerAtZero) {
    const PhiJet j = phi_jet(IntegerPower{1.0, 1.0, 0.0, 1}, 0.0);
    EXPECT_DOUBLE_EQ(j.phi, 1.0);
    EXPECT_DOUBLE_EQ(j.d1, 0.0);
}

TEST(Phi, DerivativesMatchOracle) {
    for (const auto& [name, f] : families()) {
        const double bound = std::fmin(0.7, 0.85 * s_bound(f));
        for (int i = -6; i <= 6; ++i) {
            const double s = bound * i / 6.0;
            const PhiJet j = phi_jet(f, s);
            auto val = [&](double t) { return phi_jet(f, t).phi; };
            auto der = [&](double t) { return phi_jet(f, t).d1; };
            EXPECT_NEAR(j.d1, fd::d1(val, s, 1e-3), 1e-6) << name << " s=" << s;
            EXPECT_NEAR(j.d2, fd::d1(der, s, 1e-3), 1e-6) << name << " s=" << s;
        }
    }
}

TEST(Phi, OutsideDomainThrows) {
    try {
        phi_jet(IntegerPower{1.0, 1.0, 0.0, 1}, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DomainExit);
    }
    EXPECT_THROW(phi_jet(SquareRootFamily{4.0, 1.0}, 0.6), Error);
}

TEST(Phi, TaylorMapQuadratic) {
    const KTriple p = taylor_to_k(QuadraticFamily{Sign::Plus});
    EXPECT_NEAR(p.k1, 2.0, 1e-9);
    EXPECT_NEAR(p.k2, 0.0, 1e-9);
    EXPECT_NEAR(p.k3, -3.0, 1e-9);
    const KTriple m = taylor_to_k(QuadraticFamily{Sign::Minus});
    EXPECT_NEAR(m.k1, -2.0, 1e-9);
    EXPECT_NEAR(m.k2, 0.0, 1e-9);
    EXPECT_NEAR(m.k3, 3.0, 1e-9);
}

TEST(Phi, TaylorMapSquareRootSubstitution) {
    for (double k : {-0.5, 0.0, 0.3})
        for (double c : {0.5, 1.0, 2.0}) {
            const KTriple t = taylor_to_k(SquareRootFamily{k, c});
            EXPECT_NEAR(t.k1, 2 * c - k, 1e-9);
            EXPECT_NEAR(t.k3, -3 * c - k, 1e-9);
            EXPECT_NEAR(t.k2, (2 * t.k1 + 3 * t.k3) * (3 * t.k1 + 2 * t.k3) / 25.0, 1e-9);
        }
}

TEST(Phi, TaylorMapFlagsRanders) {
    for (double k : {0.5, -0.3, 2.0}) {
        try {
            taylor_to_k(RandersType{0.2, k});
            FAIL() << k;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::RandersTypeDegenerate);
        }
    }
}

TEST(Phi, TaylorCoefficientsMatchDerivatives) {
    const PhiFamily f = SquareRootFamily{0.4, 1.0};
    const TaylorData t = taylor_coefficients(f);
    EXPECT_NEAR(t.a[0], 1.0, 1e-14);
    EXPECT_NEAR(2.0 * t.a[2], phi_jet(f, 0.0).d2, 1e-12);
}

TEST(Phi, TaylorMapRecoversOdeParameters) {
    const QuarticODE f = make_quartic_ode(0.5, 0.3, -0.2, 0.0, 0.5);
    const KTriple t = taylor_to_k(PhiFamily{f});
    EXPECT_NEAR(t.k1, 0.5, 1e-9);
    EXPECT_NEAR(t.k2, 0.3, 1e-9);
    EXPECT_NEAR(t.k3, -0.2, 1e-9);
}

TEST(Phi, OdeMatchesSquareRoot) {
    const double k = 0.2, c = 0.7;
    const double k1 = 2 * c - k, k3 = -3 * c - k;
    const double k2 = (2 * k1 + 3 * k3) * (3 * k1 + 2 * k3) / 25.0;
    const PhiFamily ode = make_quartic_ode(k1, k2, k3, 0.0, 0.5);
    const PhiFamily sq = SquareRootFamily{k, c};
    for (int i = -10; i <= 10; ++i) {
        const double s = 0.05 * i;
        EXPECT_NEAR(phi_jet(ode, s).phi, phi_jet(sq, s).phi, 1e-7) << s;
        EXPECT_NEAR(phi_jet(ode, s).d1, phi_jet(sq, s).d1, 1e-7) << s;
    }
}

TEST(Phi, OdeTrivialParameters) {
    const PhiFamily f = make_quartic_ode(0, 0, 0, 0, 1.0);
    for (double s : {-0.9, -0.3, 0.0, 0.4, 0.9}) EXPECT_NEAR(phi_jet(f, s).phi, 1.0, 1e-12);
}

TEST(Phi, OdePlugBackResidual) {
    for (auto [k1, k2, k3, eps] : std::vector<std::array<double, 4>>{
             {0.5, 0.2, -0.4, 0.1}, {0, 1, 0, 0}, {-1, 0.3, 0.5, 0.2}, {2, -0.5, 1, 0}}) {
        const auto sol = solve_quartic_ode(k1, k2, k3, eps, 0.6);
        EXPECT_LE(sol->max_residual(50), 1e-8);
    }
}

TEST(Phi, OdeSingularCoefficient) {
    // 1 + (k1 + k3) s^2 + k2 s^4 vanishes at s^2 = 1/2.
    try {
        solve_quartic_ode(-2.0, 0.0, 0.0, 0.0, 0.9);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularODE);
    }
}

TEST(Phi, PowerIntegralBasics) {
    const PowerIntegrand in = integrand_of(IntegerPower{1.0, 1.0, 0.0, 1});
    EXPECT_EQ(singular_power_integral(in, 0.0).value, 0.0);
    for (double s : {0.1, 0.4, 0.8})
        EXPECT_DOUBLE_EQ(singular_power_integral(in, -s).value, -singular_power_integral(in, s).value);
    // int_0^s t^2 / (1 - t^2)^{3/2} dt = s / sqrt(1 - s^2) - asin(s)
    const double s = 0.5;
    const double exact = s / std::sqrt(1 - s * s) - std::asin(s);
    EXPECT_NEAR(singular_power_integral(in, s, 1e-9).value, exact, 1e-9);
    EXPECT_NEAR(singular_power_integral(in, s, 1e-13).value, exact, 1e-12);
}

TEST(Phi, RegularityQuadraticPlus) {
    const PhiFamily f = QuadraticFamily{Sign::Plus};
    EXPECT_NEAR(regularity_margin(f, 0.9), 0.19, 1e-9);
    EXPECT_NEAR(regularity_radius(f, 2.0), 1.0, 1e-6);
}

TEST(Phi, RegularityQuadraticMinus) {
    const PhiFamily f = QuadraticFamily{Sign::Minus};
    EXPECT_NEAR(regularity_margin(f, 0.8), 1 - 2 * 0.64, 1e-9);
    EXPECT_NEAR(regularity_radius(f, 2.0), 1.0 / std::sqrt(2.0), 1e-6);
}

TEST(Phi, FamilyNamesAndChecks) {
    EXPECT_EQ(family_name(QuadraticFamily{Sign::Plus}), "quadratic");
    EXPECT_EQ(family_name(HalfPower{}), "half_power");
    EXPECT_THROW(check_family(IntegerPower{-1.0, 1.0, 0.0, 1}), Error);
    EXPECT_THROW(check_family(HalfPower{1.0, 1.0, 0.0, 0}), Error);
}
