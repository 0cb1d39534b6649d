#include <gtest/gtest.h>

#include <cmath>

#include "support/fixtures.hpp"

using namespace finsler;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::ConfigError;
}

ScalarField constant(double c) {
    return [c](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return T(c);
    };
}

}  // namespace

TEST(Th2, BetaNormEqualsB) {
    for (const auto& c : {fx::th2_quarter(), fx::th2_varying()}) {
        for (const auto& p : make_grid(c.pair, 7).points) {
            const double B = c.pair.name == "th2" ? 0.25 : 0.2 + 0.1 * p.x1 * p.x2;
            EXPECT_NEAR(beta_norm2(c.pair, p), B, 1e-12) << c.pair.name;
        }
    }
}

TEST(Th2, ConstructionIsDouglas) {
    for (const auto& c : {fx::th2_quarter(), fx::th2_varying()}) {
        const auto rep = douglas_check(douglas_provider(c.pair, c.family), make_grid(c.pair, 9), 1e-7);
        EXPECT_TRUE(rep.passed()) << c.pair.name << " " << rep.max_residual;
    }
}

TEST(Th2, OutOfRangeB) {
    const Box box{0.2, 1.0, 0.2, 1.0};
    EXPECT_EQ(code_of([&] { build_th2(constant(1.2), identity_map(), Sign::Plus, box); }), ErrorCode::RangeViolation);
    EXPECT_EQ(code_of([&] { build_th2(constant(0.6), identity_map(), Sign::Minus, box); }),
              ErrorCode::RangeViolation);
    EXPECT_EQ(code_of([&] { build_th2(constant(-0.1), identity_map(), Sign::Plus, box); }),
              ErrorCode::RangeViolation);
}

TEST(Th2, DeformationIsConformal) {
    for (const auto& c : {fx::th2_quarter(), fx::th2_varying()}) {
        const MetricPair d = deform_th2(c.pair, Sign::Plus);
        const auto rep = conformality_residual(d, ConformalMode::THM2, make_grid(d, 9), 1e-8);
        EXPECT_TRUE(rep.passed()) << c.pair.name << " " << rep.max_residual;
    }
}

// lambda of the deformed pair against tau of the original.
TEST(Th2, DeformationScaleMatchesTau) {
    const Construction c = fx::th2_varying();
    const MetricPair d = deform_th2(c.pair, Sign::Plus);
    const Grid g = make_grid(c.pair, 7);
    const auto cls = class_beta_residual(ClassId::DOUGLAS_COR, c.pair, class_params(ClassId::DOUGLAS_COR, c.family),
                                         g, 1e-8);
    ASSERT_TRUE(cls.passed()) << cls.max_residual;
    const auto conf = conformality_residual(d, ConformalMode::THM2, g, 1e-8);
    ASSERT_TRUE(conf.passed());
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        if (cls.points[i].excluded || conf.points[i].excluded) continue;
        const double b2 = beta_norm2(c.pair, g.points[i]);
        const double tau = cls.points[i].scalars.at("tau");
        const double want = 2.0 * tau * std::pow(1.0 - b2, 2) / std::pow(1.0 + 2.0 * b2, 2.5);
        EXPECT_NEAR(conf.points[i].scalars.at("lambda"), want, 1e-8 * (1.0 + std::fabs(want)));
    }
}

TEST(Th2, DeformationOfZeroFormScalesNothing) {
    const MetricPair e = fx::euclidean();
    for (Sign sg : {Sign::Plus, Sign::Minus}) {
        const MetricPair d = deform_th2(e, sg);
        for (const auto& p : make_grid(d, 3).points) {
            const Mat2<double> a = d.a(p.vec());
            EXPECT_NEAR(a(0, 0), 1.0, 1e-15);
            EXPECT_NEAR(a(0, 1), 0.0, 1e-15);
            EXPECT_NEAR(a(1, 1), 1.0, 1e-15);
        }
    }
}

TEST(Th2, EtaSeriesMatchesClosedForm) {
    for (double sg : {1.0, -1.0}) {
        const double B = 1.2e-3;
        const double p = std::pow(1.0 + 2.0 * sg * B, 1.5);
        const double closed = 9.0 / (8.0 * B) * (p - (1.0 - 2.0 * sg * B + 4.0 * B * B) / p);
        const double Bs = 0.999e-3, ps = std::pow(1.0 + 2.0 * sg * Bs, 1.5);
        EXPECT_NEAR(th2_eta(Bs, sg), 9.0 / (8.0 * Bs) * (ps - (1.0 - 2.0 * sg * Bs + 4.0 * Bs * Bs) / ps), 1e-9);
        EXPECT_NEAR(th2_eta(B, sg), closed, 1e-12);
        EXPECT_NEAR(th2_eta(0.0, sg), 9.0 * sg, 1e-15);
    }
}

TEST(CFunction, SquareRootForm) {
    const CFunction c{0.0, 1.0, 0.0};
    for (double B : {0.0, 0.1, 0.5, 1.0, 2.5}) EXPECT_NEAR(c.value(B), std::pow(1.0 + B * B, 0.25), 1e-10) << B;
    EXPECT_NEAR(c.value(0.5), std::pow(1.25, 0.25), 1e-12);
}

TEST(CFunction, DerivativesLiftCorrectly) {
    const CFunction c{0.3, 0.5, 0.2};
    const D1 B(0.4, {1.0, 0.0, 0.0, 0.0});
    const D1 v = c(B);
    const double h = 1e-5;
    EXPECT_NEAR(v.d[0], (c.value(0.4 + h) - c.value(0.4 - h)) / (2 * h), 1e-8);
}

TEST(CFunction, NonPositiveDenominator) {
    const CFunction c{-3.0, 0.0, 0.0};
    EXPECT_EQ(code_of([&] { c.value(1.0); }), ErrorCode::ConstraintViolation);
}

TEST(Th001, ExcludedTriples) {
    EXPECT_EQ(code_of([] { check_excluded_triple(1.0, 0.24, 0.0); }), ErrorCode::ConstraintViolation);
    EXPECT_EQ(code_of([] { check_excluded_triple(1.0, 0.0, 0.0); }), ErrorCode::ConstraintViolation);
    EXPECT_NO_THROW(check_excluded_triple(0.0, 1.0, 0.0));
}

TEST(Th001, RadialBuildSatisfiesPde) {
    const Th001Params prm = fx::th001_radial_params();
    EXPECT_LE(pde_residual(th001_sigma(prm), prm.f, box_points(prm.box)), 1e-9);
    const MetricPair pair = build_th001(prm);
    for (const auto& p : make_grid(pair, 5).points)
        EXPECT_NEAR(beta_norm2(pair, p), prm.B(p.vec()), 1e-10);
}

TEST(Th001, IncompatibleDataRejected) {
    Th001Params prm = fx::th001_radial_params();
    prm.B = [](const auto& x) { return 0.3 + 0.1 * x[0]; };
    EXPECT_EQ(code_of([&] { build_th001(prm); }), ErrorCode::ConstraintViolation);
}

TEST(Th001, SpecialTriple) {
    const SpecialTriple t = special_triple(0.3, 0.4);
    const auto pts = box_points({0.2, 1.0, 0.2, 1.0});
    EXPECT_LE(cauchy_riemann_residual(t.f, pts), 1e-12);
    EXPECT_LE(pde_residual(t.sigma, t.f, pts), 1e-12);
    const double B = special_triple_B(0.0, 1.0, 0.0, 0.3, 0.4);
    const double cb = CFunction{0.0, 1.0, 0.0}.value(B);
    EXPECT_NEAR(B / (cb * cb), 0.25, 1e-12);
    EXPECT_NEAR(B, 0.258198889747, 1e-10);
    EXPECT_EQ(code_of([] { special_triple_B(0.0, 1.0, 0.0, 0.0, 0.0); }), ErrorCode::DegenerateForm);
}

TEST(Th001, SpecialTripleBuilds) {
    const SpecialTriple t = special_triple(0.3, 0.4);
    Th001Params prm;
    prm.B = constant(special_triple_B(0.0, 1.0, 0.0, 0.3, 0.4));
    prm.f = t.f;
    prm.box = {0.2, 1.0, 0.2, 1.0};
    const MetricPair pair = build_th001(prm);
    const auto rep = closedness_report(pair, make_grid(pair, 5));
    EXPECT_EQ(rep.summary.at("closed"), 1.0);
}

TEST(Th001, DeformationScalesNorm) {
    const Construction c = fx::th001_radial();
    const MetricPair d = deform_th001(c.pair, 2.0);
    for (const auto& p : make_grid(c.pair, 5).points)
        EXPECT_NEAR(beta_norm2(d, p), beta_norm2(c.pair, p) / 4.0, 1e-12);
    const MetricPair same = deform_th001(c.pair, 1.0);
    for (const auto& p : make_grid(c.pair, 3).points) {
        EXPECT_EQ(same.b(p.vec())[0], c.pair.b(p.vec())[0]);
        EXPECT_EQ(same.b(p.vec())[1], c.pair.b(p.vec())[1]);
    }
    EXPECT_EQ(code_of([&] { deform_th001(c.pair, 0.0); }), ErrorCode::RangeViolation);
    EXPECT_EQ(code_of([&] { deform_th001(c.pair, -1.0); }), ErrorCode::RangeViolation);
}

TEST(PfExample, BetaIsNotClosed) {
    for (Sign sg : {Sign::Plus, Sign::Minus}) {
        const Construction c = build_pf_example(0, 0, 1, 0, sg);
        const auto rep = closedness_report(c.pair, make_grid(c.pair, 7));
        EXPECT_EQ(rep.summary.at("closed"), 0.0);
        EXPECT_GT(rep.max_residual, 1e-3);
    }
}

TEST(PfExample, ZeroLocusExcluded) {
    const Construction c = build_pf_example(0.1, -0.2, 1, 0, Sign::Plus);
    EXPECT_FALSE(c.pair.admissible({-0.1, 0.2}, 0.05));
    const Vec2<double> b = c.pair.b(Vec2<double>{-0.1, 0.2});
    EXPECT_EQ(b[0], 0.0);
    EXPECT_EQ(b[1], 0.0);
}

TEST(PfExample, ScaleConstantShiftsOnlyTheScale) {
    const Construction a = build_pf_example(0, 0, 1, 0, Sign::Plus);
    const Construction b = build_pf_example(0, 0, 1, 0.5, Sign::Plus);
    const Point p{0.1, 0.2};
    EXPECT_NEAR(b.pair.a(p.vec())(0, 0), std::exp(1.0) * a.pair.a(p.vec())(0, 0), 1e-12);
    EXPECT_NEAR(beta_norm2(a.pair, p), beta_norm2(b.pair, p), 1e-12);
}

TEST(Singular, NonclosedIndicator) {
    const ScalarField s = log_radius_sigma(0.5);
    EXPECT_GT(std::fabs(nonclosed_indicator(s, rotation_xi(), rotation_eta(), {1.0, 0.0})), 1e-3);
    const Construction c = build_ex01(1);
    EXPECT_EQ(closedness_report(c.pair, make_grid(c.pair, 5)).summary.at("closed"), 0.0);
}

TEST(Singular, TauTildeVanishesForRadialScale) {
    const ScalarField s = log_radius_sigma(0.5);
    for (const auto& p : box_points(kSingularBox, 5))
        EXPECT_NEAR(tau_tilde(s, rotation_xi(), rotation_eta(), 1.0, p), 0.0, 1e-12);
}

TEST(Singular, ConstantNorm) {
    for (const Construction& c : {build_ex01(1), build_ex01(2), build_ex02(1), build_ex02(2)})
        for (const auto& p : make_grid(c.pair, 5).points) EXPECT_NEAR(beta_norm2(c.pair, p), 1.0, 1e-12);
}

TEST(Singular, OriginExcluded) {
    const Construction c = build_ex01(1, 1.0, 1.0, 0.0, {-0.5, 0.5, -0.5, 0.5});
    for (const auto& p : make_grid(c.pair).points) EXPECT_GT(p.x1 * p.x1 + p.x2 * p.x2, 0.0);
    EXPECT_FALSE(c.pair.admissible({0.0, 0.0}, 0.05));
}

TEST(Closing, TypeIIAtZeroK) {
    const Construction c = build_closing_example(Sign::Minus);
    EXPECT_TRUE(std::holds_alternative<QuadraticFamily>(c.family));
    EXPECT_FALSE(c.pair.admissible({0.75, 0.0}, 0.0));
}
