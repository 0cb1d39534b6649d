#pragma once
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/constructs.hpp"
#include "finsler/expr.hpp"
#include "finsler/verify.hpp"

namespace finsler::app {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode { kPass = 0, kFail = 1, kInconclusive = 2, kConfigError = 3 };

struct TraceSpec {
    int count = 8;
    double arclength = kDefaultArclength;
    int steps = kDefaultTraceSteps;
    std::vector<std::array<double, 4>> starts;  // x1, x2, y1, y2
    bool operator==(const TraceSpec&) const = default;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    json metric;
    json family;  // null: the builder's own family
    std::optional<Box> domain;
    int grid = kDefaultGrid;
    int directions = kDefaultDirections;
    int angles = kDefaultAngles;
    double margin = kDefaultMargin;
    Tolerances tol;
    double tol_spray = 1e-7;
    std::uint64_t seed = 1;
    std::vector<std::string> checks;
    std::optional<double> s_fraction;
    TraceSpec traces;
    std::string report_path;
    std::string trace_dir;
    bool operator==(const RunConfig&) const = default;
};

[[noreturn]] inline void config_error(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ConfigError, field + ": " + what);
}

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(key, e.what());
    }
}

inline Box box_from(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 4) config_error(field, "expected [x1_min, x1_max, x2_min, x2_max]");
    Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!(b.x1_min < b.x1_max && b.x2_min < b.x2_max)) config_error(field, "empty box");
    return b;
}

inline json box_to(const Box& b) { return json::array({b.x1_min, b.x1_max, b.x2_min, b.x2_max}); }

inline Sign sign_from(const json& j, const std::string& field) {
    const std::string s = j.is_string() ? j.get<std::string>() : std::string();
    if (s == "+" || s == "plus") return Sign::Plus;
    if (s == "-" || s == "minus") return Sign::Minus;
    config_error(field, "sign must be \"+\" or \"-\"");
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
    using detail::get_or;
    if (!j.is_object()) config_error("config", "expected a JSON object");
    RunConfig c;
    c.schema_version = get_or(j, "schema_version", 0);
    if (c.schema_version != kSchemaVersion)
        config_error("schema_version", "unsupported version " + std::to_string(c.schema_version));
    if (!j.contains("metric") || !j["metric"].is_object()) config_error("metric", "missing metric object");
    c.metric = j["metric"];
    if (j.contains("family") && !j["family"].is_null()) {
        if (!j["family"].is_object()) config_error("family", "expected an object");
        c.family = j["family"];
    }
    if (j.contains("domain")) c.domain = detail::box_from(j["domain"], "domain");
    c.grid = get_or(j, "grid", c.grid);
    c.directions = get_or(j, "directions", c.directions);
    c.angles = get_or(j, "angles", c.angles);
    c.margin = get_or(j, "margin", c.margin);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) config_error("tolerances", "expected an object");
        for (auto it = t.begin(); it != t.end(); ++it) {
            const std::string k = it.key();
            if (k != "douglas" && k != "hamel" && k != "class" && k != "conformality" && k != "geodesic" &&
                k != "spray")
                config_error("tolerances." + k, "unknown tolerance");
        }
        c.tol.douglas = get_or(t, "douglas", c.tol.douglas);
        c.tol.hamel = get_or(t, "hamel", c.tol.hamel);
        c.tol.cls = get_or(t, "class", c.tol.cls);
        c.tol.conformality = get_or(t, "conformality", c.tol.conformality);
        c.tol.geodesic = get_or(t, "geodesic", c.tol.geodesic);
        c.tol_spray = get_or(t, "spray", c.tol_spray);
    }
    if (j.contains("checks")) {
        if (!j["checks"].is_array()) config_error("checks", "expected an array of names");
        c.checks = j["checks"].get<std::vector<std::string>>();
    }
    if (j.contains("s_fraction")) c.s_fraction = j["s_fraction"].get<double>();
    if (j.contains("traces")) {
        const json& t = j["traces"];
        c.traces.count = get_or(t, "count", c.traces.count);
        c.traces.arclength = get_or(t, "arclength", c.traces.arclength);
        c.traces.steps = get_or(t, "steps", c.traces.steps);
        if (t.contains("starts"))
            for (const auto& s : t["starts"])
                c.traces.starts.push_back({s.at("x1").get<double>(), s.at("x2").get<double>(),
                                           s.at("y1").get<double>(), s.at("y2").get<double>()});
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        c.report_path = get_or<std::string>(o, "report", "");
        c.trace_dir = get_or<std::string>(o, "trace_dir", "");
    }
    return c;
}

inline json to_json(const RunConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["metric"] = c.metric;
    if (!c.family.is_null()) j["family"] = c.family;
    if (c.domain) j["domain"] = detail::box_to(*c.domain);
    j["grid"] = c.grid;
    j["directions"] = c.directions;
    j["angles"] = c.angles;
    j["margin"] = c.margin;
    j["seed"] = c.seed;
    j["tolerances"] = {{"douglas", c.tol.douglas},           {"hamel", c.tol.hamel},
                       {"class", c.tol.cls},                 {"conformality", c.tol.conformality},
                       {"geodesic", c.tol.geodesic},         {"spray", c.tol_spray}};
    j["checks"] = c.checks;
    if (c.s_fraction) j["s_fraction"] = *c.s_fraction;
    json starts = json::array();
    for (const auto& s : c.traces.starts) starts.push_back({{"x1", s[0]}, {"x2", s[1]}, {"y1", s[2]}, {"y2", s[3]}});
    j["traces"] = {{"count", c.traces.count},
                   {"arclength", c.traces.arclength},
                   {"steps", c.traces.steps},
                   {"starts", starts}};
    json out = json::object();
    if (!c.report_path.empty()) out["report"] = c.report_path;
    if (!c.trace_dir.empty()) out["trace_dir"] = c.trace_dir;
    if (!out.empty()) j["output"] = out;
    return j;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("config", "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        config_error("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline bool known_check(const std::string& name) {
    if (name == "douglas" || name == "hamel" || name == "closedness" || name == "b_constancy" ||
        name == "geodesic" || name == "spray" || name == "regularity")
        return true;
    if (name.rfind("class:", 0) == 0) return parse_class(name.substr(6)).has_value();
    return name == "conformality:THM2" || name == "conformality:THM001";
}

inline void validate(const RunConfig& c) {
    auto positive = [](const char* f, double v) {
        if (!(v > 0.0)) config_error(f, "must be positive");
    };
    positive("tolerances.douglas", c.tol.douglas);
    positive("tolerances.hamel", c.tol.hamel);
    positive("tolerances.class", c.tol.cls);
    positive("tolerances.conformality", c.tol.conformality);
    positive("tolerances.geodesic", c.tol.geodesic);
    positive("tolerances.spray", c.tol_spray);
    if (c.grid < 3) config_error("grid", "must be at least 3");
    if (c.directions < 4) config_error("directions", "must be at least 4");
    if (c.angles < kMinUsableAngles) config_error("angles", "must be at least 8");
    if (!(c.margin >= 0.0 && c.margin < 0.5)) config_error("margin", "must lie in [0, 0.5)");
    if (c.traces.count < 1) config_error("traces.count", "must be at least 1");
    if (c.traces.steps < 2) config_error("traces.steps", "must be at least 2");
    if (!(c.traces.arclength > 0.0)) config_error("traces.arclength", "must be positive");
    if (c.s_fraction && !(*c.s_fraction > 0.0)) config_error("s_fraction", "must be positive");
    for (std::size_t i = 0; i < c.checks.size(); ++i)
        if (!known_check(c.checks[i]))
            config_error("checks[" + std::to_string(i) + "]", "unknown check '" + c.checks[i] + "'");
}

// ---------------------------------------------------------------------------
// Building the metric

struct Built {
    MetricPair pair;
    PhiFamily family;
    std::optional<MetricPair> deformed;
};

inline PhiFamily parse_family(const json& f, double s_max_hint = 1.0) {
    using detail::get_or;
    const std::string type = get_or<std::string>(f, "type", "");
    PhiFamily fam;
    if (type == "randers") {
        fam = RandersType{get_or(f, "eps", 0.0), get_or(f, "k", 1.0)};
    } else if (type == "quartic_ode") {
        const double s_max = get_or(f, "s_max", s_max_hint);
        fam = make_quartic_ode(get_or(f, "k1", 0.0), get_or(f, "k2", 0.0), get_or(f, "k3", 0.0),
                               get_or(f, "eps", 0.0), s_max);
    } else if (type == "square_root") {
        fam = SquareRootFamily{get_or(f, "k", 0.0), get_or(f, "c", 1.0)};
    } else if (type == "quadratic") {
        fam = QuadraticFamily{detail::sign_from(f.value("sign", json("+")), "family.sign")};
    } else if (type == "integer_power") {
        fam = IntegerPower{get_or(f, "b", 1.0), get_or(f, "c", 1.0), get_or(f, "k", 0.0), get_or(f, "m", 1)};
    } else if (type == "half_power") {
        fam = HalfPower{get_or(f, "b", 1.0), get_or(f, "c", 1.0), get_or(f, "k", 0.0), get_or(f, "m", 1)};
    } else if (type == "singular_b") {
        fam = SingularB{get_or(f, "b", 1.0), get_or(f, "ctilde", 0.0)};
    } else {
        config_error("family.type", "unknown family '" + type + "'");
    }
    check_family(fam);
    return fam;
}

inline ScalarField field_of(const json& m, const char* key) {
    if (!m.contains(key)) config_error(std::string("metric.") + key, "missing");
    const json& v = m[key];
    if (v.is_number()) return expr::to_field(v.dump());
    if (!v.is_string()) config_error(std::string("metric.") + key, "expected an expression string");
    return expr::to_field(v.get<std::string>());
}

inline std::array<double, 3> k_triple(const json& m, const std::string& field) {
    if (!m.contains("k")) return {0.0, 1.0, 0.0};
    const json& k = m["k"];
    if (!k.is_array() || k.size() != 3) config_error(field, "expected [k1, k2, k3]");
    return {k[0].get<double>(), k[1].get<double>(), k[2].get<double>()};
}

inline Built build(const RunConfig& c) {
    using detail::get_or;
    const json& m = c.metric;
    const std::string builder = get_or<std::string>(m, "builder", "");
    auto need_box = [&]() -> Box {
        if (c.domain) return *c.domain;
        if (m.contains("domain")) return detail::box_from(m["domain"], "metric.domain");
        config_error("domain", "builder '" + builder + "' needs a domain box");
    };
    auto with_box = [&](Box fallback) { return c.domain ? *c.domain : fallback; };
    std::optional<PhiFamily> fam;
    MetricPair pair;
    if (builder == "euclidean" || builder == "inline") {
        pair.name = builder;
        pair.domain = with_box(m.contains("domain") ? detail::box_from(m["domain"], "metric.domain") : Box{});
        if (builder == "euclidean") {
            pair.alpha = [](const auto& x) {
                using T = std::decay_t<decltype(x[0])>;
                return Mat2<T>::identity();
            };
        } else if (m.contains("sigma")) {
            const ScalarField s = field_of(m, "sigma");
            pair.alpha = [s](const auto& x) {
                using std::exp;
                using T = std::decay_t<decltype(x[0])>;
                const T e = exp(2.0 * s(x));
                return Mat2<T>(e, T(0.0), T(0.0), e);
            };
        } else if (m.contains("alpha")) {
            const json& a = m["alpha"];
            if (!a.is_array() || a.size() != 2 || a[0].size() != 2 || a[1].size() != 2)
                config_error("metric.alpha", "expected a 2x2 array of expressions");
            std::array<ScalarField, 3> e{expr::to_field(a[0][0].get<std::string>()),
                                         expr::to_field(a[0][1].get<std::string>()),
                                         expr::to_field(a[1][1].get<std::string>())};
            pair.alpha = [e](const auto& x) {
                using T = std::decay_t<decltype(x[0])>;
                const T off = e[1](x);
                return Mat2<T>(e[0](x), off, off, e[2](x));
            };
        } else {
            pair.alpha = [](const auto& x) {
                using T = std::decay_t<decltype(x[0])>;
                return Mat2<T>::identity();
            };
        }
        if (builder == "inline" && m.contains("beta")) {
            const json& b = m["beta"];
            if (!b.is_array() || b.size() != 2) config_error("metric.beta", "expected two expressions");
            std::array<ScalarField, 2> e{expr::to_field(b[0].get<std::string>()),
                                         expr::to_field(b[1].get<std::string>())};
            pair.beta = [e](const auto& x) {
                using T = std::decay_t<decltype(x[0])>;
                return Vec2<T>(e[0](x), e[1](x));
            };
        } else {
            pair.beta = [](const auto& x) {
                using T = std::decay_t<decltype(x[0])>;
                return Vec2<T>(T(0.0), T(0.0));
            };
        }
        if (m.contains("loci"))
            for (const auto& l : m["loci"])
                pair.excluded_loci.push_back({get_or<std::string>(l, "description", ""),
                                              expr::to_field(l.at("expr").get<std::string>()),
                                              get_or(l, "positive_side", false)});
        validate(pair, make_grid(pair, c.grid, c.margin));
    } else if (builder == "conformal") {
        pair = conformal_pair(field_of(m, "sigma"), field_of(m, "xi"), field_of(m, "eta"), get_or(m, "b", 0.0),
                              need_box());
    } else if (builder == "pf_example") {
        const Sign s = detail::sign_from(m.value("sign", json("+")), "metric.sign");
        auto built = build_pf_example(get_or(m, "c1", 0.0), get_or(m, "c2", 0.0), get_or(m, "c3", 1.0),
                                      get_or(m, "c4", 0.0), s);
        pair = built.pair;
        fam = built.family;
        if (c.domain) pair.domain = *c.domain;
    } else if (builder == "closing_example") {
        const Sign s = detail::sign_from(m.value("sign", json("+")), "metric.sign");
        auto built = build_closing_example(s, get_or(m, "c", 0.0), with_box({-0.3, 0.3, -0.3, 0.3}));
        pair = built.pair;
        fam = built.family;
    } else if (builder == "ex01" || builder == "ex02") {
        const int mm = get_or(m, "m", 1);
        const double b = get_or(m, "b", 1.0);
        const double cc = get_or(m, "c", builder == "ex01" ? 1.0 : 0.5);
        const double k = get_or(m, "k", 0.0);
        auto built = builder == "ex01" ? build_ex01(mm, b, cc, k, with_box(kSingularBox))
                                       : build_ex02(mm, b, cc, k, with_box(kSingularBox));
        pair = built.pair;
        fam = built.family;
    } else if (builder == "th2") {
        const Sign s = detail::sign_from(m.value("sign", json("+")), "metric.sign");
        pair = build_th2(field_of(m, "B"), {field_of(m, "u"), field_of(m, "v")}, s, need_box());
        fam = QuadraticFamily{s};
    } else if (builder == "th001" || builder == "th001_special") {
        const auto k = k_triple(m, "metric.k");
        Th001Params p;
        p.k1 = k[0], p.k2 = k[1], p.k3 = k[2];
        p.box = need_box();
        if (builder == "th001") {
            p.B = field_of(m, "B");
            p.f = {field_of(m, "u"), field_of(m, "v")};
        } else {
            const double c1 = get_or(m, "c1", 0.3), c2 = get_or(m, "c2", 0.4);
            const double B = special_triple_B(k[0], k[1], k[2], c1, c2);
            p.B = [B](const auto& x) {
                using T = std::decay_t<decltype(x[0])>;
                return T(B);
            };
            p.f = special_triple(c1, c2).f;
        }
        pair = build_th001(p);
        double bmax = 0.0;
        for (const auto& q : make_grid(pair, c.grid, c.margin).points) bmax = std::fmax(bmax, beta_norm2(pair, q));
        fam = make_quartic_ode(k[0], k[1], k[2], 0.0, 1.05 * std::sqrt(bmax) + 1e-3);
    } else {
        config_error("metric.builder", "unknown builder '" + builder + "'");
    }
    if (!c.family.is_null()) {
        double bmax = 0.0;
        for (const auto& q : make_grid(pair, c.grid, c.margin).points) bmax = std::fmax(bmax, beta_norm2(pair, q));
        fam = parse_family(c.family, 1.05 * std::sqrt(bmax) + 1e-3);
    }
    if (!fam) fam = QuadraticFamily{Sign::Plus};
    Built out{pair, *fam, std::nullopt};
    if (m.contains("deform")) {
        const json& d = m["deform"];
        const std::string kind = get_or<std::string>(d, "kind", "");
        if (kind == "th2") {
            out.deformed = deform_th2(pair, detail::sign_from(d.value("sign", json("+")), "metric.deform.sign"));
        } else if (kind == "th001") {
            if (d.contains("c")) {
                out.deformed = deform_th001(pair, d["c"].get<double>());
            } else {
                const auto k = k_triple(d, "metric.deform.k");
                out.deformed = deform_th001(pair, k[0], k[1], k[2]);
            }
        } else {
            config_error("metric.deform.kind", "unknown deformation '" + kind + "'");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

inline ojson report_json(const VerificationReport& r) {
    ojson j;
    j["check"] = r.check;
    j["grid"] = r.grid;
    j["tolerance"] = r.tolerance;
    j["seed"] = r.seed;
    j["max_residual"] = r.max_residual;
    j["mean_residual"] = r.mean_residual;
    j["points_total"] = r.points.size();
    j["excluded"] = r.excluded;
    j["verdict"] = r.verdict;
    ojson rec = ojson::object();
    for (const auto& p : r.points)
        for (const auto& [k, v] : p.scalars) {
            const double a = std::fabs(v);
            if (!p.excluded && (!rec.contains(k) || a > rec[k].get<double>())) rec[k] = a;
        }
    j["recovered_max_abs"] = rec;
    ojson summary = ojson::object();
    for (const auto& [k, v] : r.summary) summary[k] = v;
    j["summary"] = summary;
    j["warnings"] = r.warnings;
    ojson pts = ojson::array();
    for (const auto& p : r.points) {
        ojson q;
        q["x1"] = p.p.x1;
        q["x2"] = p.p.x2;
        q["residual"] = p.residual;
        q["excluded"] = p.excluded;
        if (!p.note.empty()) q["note"] = p.note;
        ojson s = ojson::object();
        for (const auto& [k, v] : p.scalars) s[k] = v;
        q["scalars"] = s;
        pts.push_back(q);
    }
    j["points"] = pts;
    return j;
}

struct RunResult {
    std::vector<VerificationReport> reports;
    std::string verdict;
    int exit_code = kPass;
    ojson report;
};

inline std::string overall_verdict(const std::vector<VerificationReport>& reps) {
    bool fail = false, inconclusive = false;
    for (const auto& r : reps) {
        if (r.verdict == "fail") fail = true;
        if (r.verdict == "inconclusive") inconclusive = true;
    }
    return fail ? "fail" : inconclusive ? "inconclusive" : "pass";
}

inline std::vector<VerificationReport> run_checks(const RunConfig& c, const Built& b) {
    std::vector<VerificationReport> out;
    const Grid grid = make_grid(b.pair, c.grid, c.margin);
    for (const auto& name : c.checks) {
        if (name == "douglas") {
            const double lim = c.s_fraction ? *c.s_fraction * s_bound(b.family) : INFINITY;
            out.push_back(douglas_check(douglas_provider(b.pair, b.family, lim), grid, c.tol.douglas, c.angles));
        } else if (name == "hamel") {
            const double lim = c.s_fraction ? *c.s_fraction * s_bound(b.family) : INFINITY;
            out.push_back(hamel_check(b.pair, b.family, grid, c.tol.hamel, c.directions, lim));
        } else if (name == "closedness") {
            out.push_back(closedness_report(b.pair, grid));
        } else if (name == "b_constancy") {
            VerificationReport r;
            r.check = name;
            r.grid = grid.description();
            r.max_residual = b_constancy_scan(b.pair, grid);
            r.verdict = "info";
            out.push_back(r);
        } else if (name == "geodesic") {
            out.push_back(geodesic_check(b.pair, b.family, c.tol.geodesic, c.seed, c.traces.count,
                                         c.traces.arclength, c.traces.steps, c.margin));
        } else if (name == "spray") {
            out.push_back(spray_crosscheck(b.pair, b.family, c.tol_spray, c.seed, 100, c.margin));
        } else if (name == "regularity") {
            double rho = 0.0;
            for (const auto& p : grid.points) rho = std::fmax(rho, std::sqrt(beta_norm2(b.pair, p)));
            VerificationReport r;
            r.check = name;
            r.grid = grid.description();
            const double margin = regularity_margin(b.family, rho);
            r.summary["rho"] = rho;
            r.summary["margin"] = margin;
            r.max_residual = -margin;
            r.verdict = margin > 0.0 ? "pass" : "fail";
            out.push_back(r);
        } else if (name.rfind("class:", 0) == 0) {
            const ClassId id = *parse_class(name.substr(6));
            const ClassParams cp = class_params(id, b.family);
            out.push_back(class_beta_residual(id, b.pair, cp, grid, c.tol.cls));
            if (is_projective(id))
                out.push_back(class_spray_residual(id, b.pair, cp, grid, c.tol.cls, c.directions));
        } else if (name.rfind("conformality:", 0) == 0) {
            if (!b.deformed) config_error("checks", name + " needs metric.deform");
            const ConformalMode mode = name == "conformality:THM2" ? ConformalMode::THM2 : ConformalMode::THM001;
            out.push_back(conformality_residual(*b.deformed, mode, make_grid(*b.deformed, c.grid, c.margin),
                                                c.tol.conformality));
        }
        for (auto& r : out)
            if (r.seed == 0) r.seed = c.seed;
    }
    return out;
}

inline RunResult run_verify(const RunConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    validate(c);
    const Built b = build(c);
    RunResult res;
    res.reports = run_checks(c, b);
    res.verdict = overall_verdict(res.reports);
    res.exit_code = res.verdict == "fail" ? kFail : res.verdict == "inconclusive" ? kInconclusive : kPass;
    res.report["schema_version"] = kSchemaVersion;
    res.report["config"] = ojson::parse(to_json(c).dump());
    res.report["metric"] = b.pair.name;
    res.report["family"] = family_name(b.family);
    ojson checks = ojson::array();
    for (const auto& r : res.reports) checks.push_back(report_json(r));
    res.report["checks"] = checks;
    res.report["verdict"] = res.verdict;
    res.report["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// Report text without the wall-clock entry, for comparisons.
inline std::string deterministic_dump(ojson report) {
    report.erase("wall_clock_seconds");
    return report.dump(2);
}

// ---------------------------------------------------------------------------
// Traces

struct TraceRecord {
    std::array<double, 4> start;
    GeodesicTrace trace;
    std::string csv_path;
};

struct TraceResult {
    std::vector<TraceRecord> traces;
    ojson summary;
};

inline std::string trace_csv(const GeodesicTrace& tr) {
    std::ostringstream os;
    os << "t,x1,x2,y1,y2\n";
    char buf[160];
    for (const auto& p : tr.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.t, p.x1, p.x2, p.y1, p.y2);
        os << buf;
    }
    return os.str();
}

inline TraceResult run_trace(const RunConfig& c) {
    validate(c);
    const Built b = build(c);
    const FinslerFunction F = finsler_function(b.pair, b.family);
    const SprayProvider G = ab_provider(b.pair, b.family);
    auto inside = [&](const Point& q) { return b.pair.inside(q); };
    std::vector<std::array<double, 4>> starts = c.traces.starts;
    for (std::size_t i = 0; i < starts.size(); ++i)
        if (!b.pair.inside({starts[i][0], starts[i][1]}))
            config_error("traces.starts[" + std::to_string(i) + "]", "start point outside the domain");
    if (starts.empty()) {
        std::mt19937_64 gen(c.seed);
        auto uniform = [&] { return double(gen() >> 11) * 0x1.0p-53; };
        const Box& box = b.pair.domain;
        int attempts = 0;
        while (int(starts.size()) < c.traces.count && attempts++ < 100000) {
            const Point p{box.x1_min + (box.x1_max - box.x1_min) * uniform(),
                          box.x2_min + (box.x2_max - box.x2_min) * uniform()};
            const double th = 2.0 * std::numbers::pi * uniform();
            if (b.pair.admissible(p, c.margin)) starts.push_back({p.x1, p.x2, std::cos(th), std::sin(th)});
        }
    }
    TraceResult res;
    ojson list = ojson::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const auto& s = starts[i];
        TraceRecord rec{s, geodesic_trace(F, G, {s[0], s[1]}, {s[2], s[3]}, c.traces.arclength, c.traces.steps, inside),
                        ""};
        if (!c.trace_dir.empty()) {
            std::filesystem::create_directories(c.trace_dir);
            char name[32];
            std::snprintf(name, sizeof name, "trace_%03zu.csv", i);
            rec.csv_path = (std::filesystem::path(c.trace_dir) / name).string();
            std::ofstream(rec.csv_path) << trace_csv(rec.trace);
        }
        worst = std::fmax(worst, rec.trace.chord_deviation);
        ojson e;
        e["start"] = {{"x1", s[0]}, {"x2", s[1]}, {"y1", s[2]}, {"y2", s[3]}};
        e["chord_deviation"] = rec.trace.chord_deviation;
        e["truncated"] = rec.trace.truncated;
        e["length"] = rec.trace.points.back().t;
        if (!rec.csv_path.empty()) e["csv"] = rec.csv_path;
        list.push_back(e);
        res.traces.push_back(std::move(rec));
    }
    res.summary["schema_version"] = kSchemaVersion;
    res.summary["metric"] = b.pair.name;
    res.summary["family"] = family_name(b.family);
    res.summary["traces"] = list;
    res.summary["max_chord_deviation"] = worst;
    return res;
}

}  // namespace finsler::app
