#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "finsler/app.hpp"
#include "support/fixtures.hpp"

using namespace finsler;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void note(Outcome& o, bool ok, const std::string& what) {
    if (!ok) o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += (ok ? "" : "FAILED ") + what;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double window(const PhiFamily& fam) { return 0.8 * s_bound(fam); }

Construction th001_special() {
    const SpecialTriple t = special_triple(0.3, 0.4);
    Th001Params prm;
    const double B = special_triple_B(0.0, 1.0, 0.0, 0.3, 0.4);
    prm.B = [B](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return T(B);
    };
    prm.f = t.f;
    prm.box = {0.2, 1.0, 0.2, 1.0};
    prm.name = "th001_special";
    const MetricPair pair = build_th001(prm);
    return {pair, make_quartic_ode(0.0, 1.0, 0.0, 0.0, 1.05 * std::sqrt(B) + 1e-3)};
}

Outcome spray_cross_validation() {
    Outcome o;
    for (const auto& n : fx::shipped()) {
        const auto rep = spray_crosscheck(n.c.pair, n.c.family, 1e-7, 20260101, 100);
        note(o, rep.passed() && rep.points.size() == 100, n.name + " " + num(rep.max_residual));
    }
    return o;
}

Outcome randers_dichotomy() {
    Outcome o;
    const MetricPair closed = fx::randers_closed(), open = fx::randers_nonclosed();
    const Grid g = make_grid(closed, 9);
    double rc = 0.0, ro = 0.0;
    for (const auto& p : g.points) {
        rc = std::fmax(rc, douglas_fit_residual(ab_provider(closed, fx::randers_family()), p).residual);
        ro = std::fmax(ro, douglas_fit_residual(ab_provider(open, fx::randers_family()), p).residual);
    }
    note(o, rc <= 1e-8, "closed " + num(rc));
    note(o, ro >= 1e-4, "nonclosed " + num(ro));
    return o;
}

Outcome pf_example() {
    Outcome o;
    for (Sign sg : {Sign::Plus, Sign::Minus}) {
        const Construction c = build_pf_example(0, 0, 1, 0, sg);
        const Grid g = make_grid(c.pair, 9);
        const auto h = hamel_check(c.pair, c.family, g, 1e-7, 16);
        const double cl = closedness_scan(c.pair, g);
        const auto geo = geodesic_check(c.pair, c.family, 1e-5, 7, 8, 0.5);
        const std::string s = sign_name(sg);
        note(o, h.passed(), s + " hamel " + num(h.max_residual));
        note(o, cl >= 1e-3, s + " closedness " + num(cl));
        note(o, geo.passed(), s + " chord " + num(geo.max_residual));
    }
    return o;
}

Outcome singular_examples() {
    Outcome o;
    for (const Construction& c : {build_ex01(1), build_ex01(2), build_ex02(1), build_ex02(2)}) {
        const auto h = hamel_check(c.pair, c.family, make_grid(c.pair, 9), 1e-6, 16, window(c.family));
        note(o, h.passed(), c.pair.name + " " + num(h.max_residual));
    }
    return o;
}

Outcome closing_example() {
    Outcome o;
    for (Sign sg : {Sign::Plus, Sign::Minus}) {
        const Construction c = build_closing_example(sg);
        const Grid g = make_grid(c.pair);
        const auto cls = class_beta_residual(ClassId::DOUGLAS_COR, c.pair,
                                             class_params(ClassId::DOUGLAS_COR, c.family), g, 1e-7);
        const auto d = douglas_check(douglas_provider(c.pair, c.family), g, 1e-7);
        const std::string s = sign_name(sg);
        note(o, cls.passed(), s + " class " + num(cls.max_residual));
        note(o, cls.max_scalar("tau") <= 1e-8, s + " |tau| " + num(cls.max_scalar("tau")));
        note(o, d.passed(), s + " douglas " + num(d.max_residual));
    }
    return o;
}

Outcome conformal_deformation() {
    Outcome o;
    const Construction c = fx::th2_quarter();
    const MetricPair d = deform_th2(c.pair, Sign::Plus);
    const Grid g = make_grid(c.pair);
    double eb = 0.0, et = 0.0;
    const double want = 0.25 / std::pow(1.5, 1.5);
    for (const auto& p : g.points) {
        eb = std::fmax(eb, std::fabs(beta_norm2(c.pair, p) - 0.25));
        et = std::fmax(et, std::fabs(beta_norm2(d, p) - want));
    }
    const auto conf = conformality_residual(d, ConformalMode::THM2, make_grid(d), 1e-8);
    note(o, eb <= 1e-9, "b^2 " + num(eb));
    note(o, conf.passed(), "conformality " + num(conf.max_residual));
    note(o, et <= 1e-9, "deformed norm " + num(et));
    return o;
}

Outcome closed_deformation() {
    Outcome o;
    const SpecialTriple t = special_triple(0.3, 0.4);
    const double pde = pde_residual(t.sigma, t.f, box_points({0.2, 1.0, 0.2, 1.0}));
    note(o, pde <= 1e-9, "pde " + num(pde));
    const CFunction cf{0.0, 1.0, 0.0};
    double ec = 0.0;
    for (int i = 0; i <= 20; ++i) {
        const double B = 0.1 * i;
        ec = std::fmax(ec, std::fabs(cf.value(B) - std::pow(1.0 + B * B, 0.25)));
    }
    note(o, ec <= 1e-10, "c(B) " + num(ec));
    const Construction c = th001_special();
    const auto cls = class_beta_residual(ClassId::DOUGLAS_I, c.pair, class_params(ClassId::DOUGLAS_I, c.family),
                                         make_grid(c.pair), 1e-6);
    note(o, cls.passed(), "class I " + num(cls.max_residual));
    const Construction r = fx::th001_radial();
    const auto rad = class_beta_residual(ClassId::DOUGLAS_I, r.pair, class_params(ClassId::DOUGLAS_I, r.family),
                                         make_grid(r.pair), 1e-6);
    o.detail += "; radial B class I " + num(rad.max_residual) + " (reported)";
    return o;
}

Outcome taylor_map() {
    Outcome o;
    const KTriple p = taylor_to_k(QuadraticFamily{Sign::Plus});
    const KTriple m = taylor_to_k(QuadraticFamily{Sign::Minus});
    const double ep = std::fmax(std::fabs(p.k1 - 2), std::fmax(std::fabs(p.k2), std::fabs(p.k3 + 3)));
    const double em = std::fmax(std::fabs(m.k1 + 2), std::fmax(std::fabs(m.k2), std::fabs(m.k3 - 3)));
    note(o, ep <= 1e-9, "plus " + num(ep));
    note(o, em <= 1e-9, "minus " + num(em));
    bool flagged = false;
    try {
        taylor_to_k(RandersType{0.3, 0.5});
    } catch (const Error& e) {
        flagged = e.code() == ErrorCode::RandersTypeDegenerate;
    }
    note(o, flagged, "randers flagged");
    return o;
}

Outcome regularity() {
    Outcome o;
    const PhiFamily plus = QuadraticFamily{Sign::Plus}, minus = QuadraticFamily{Sign::Minus};
    const double mg = regularity_margin(plus, 0.9);
    const double rp = regularity_radius(plus, 2.0);
    const double rm = regularity_radius(minus, 2.0);
    note(o, std::fabs(mg - 0.19) <= 1e-9, "margin(0.9) " + num(mg));
    note(o, std::fabs(rp - 1.0) <= 1e-6, "plus radius " + num(rp));
    note(o, std::fabs(rm - 1.0 / std::sqrt(2.0)) <= 1e-6, "minus radius " + num(rm));
    o.detail += "; minus radius 1/sqrt2 exceeds the stated b < 1/2 (logged)";
    return o;
}

Outcome implication() {
    Outcome o;
    int pf = 0;
    for (const auto& n : fx::shipped()) {
        const Grid g = make_grid(n.c.pair, 9);
        const double lim = window(n.c.family);
        const auto h = hamel_check(n.c.pair, n.c.family, g, 1e-7, 16, lim);
        if (!h.passed()) continue;
        ++pf;
        const auto d = douglas_check(douglas_provider(n.c.pair, n.c.family, lim), g, 1e-7);
        note(o, d.passed(), n.name + " " + num(d.max_residual));
    }
    note(o, pf > 0, std::to_string(pf) + " projectively flat pairs");
    return o;
}

Outcome determinism() {
    Outcome o;
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(FINSLER_CONFIG_DIR))
        if (e.path().extension() == ".json") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const app::RunConfig c = app::load_config(f);
        const bool same = app::deterministic_dump(app::run_verify(c).report) ==
                          app::deterministic_dump(app::run_verify(c).report);
        if (!same) note(o, false, std::filesystem::path(f).stem().string());
    }
    note(o, true, std::to_string(files.size()) + " configs");
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"spray cross-validation", spray_cross_validation},
        {"Randers dichotomy", randers_dichotomy},
        {"projectively flat example", pf_example},
        {"singular examples", singular_examples},
        {"closing Douglas example", closing_example},
        {"deformation to conformal (plus sign)", conformal_deformation},
        {"deformation to closed conformal", closed_deformation},
        {"Taylor map", taylor_map},
        {"regularity scans", regularity},
        {"implication property", implication},
        {"determinism", determinism},
    };
    int failed = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        if (!o.pass) ++failed;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed, %.1f s\n", failed, criteria.size(),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return failed == 0 ? 0 : 1;
}
