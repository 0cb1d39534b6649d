#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "finsler/betacalc.hpp"
#include "finsler/spray.hpp"

namespace finsler {

enum class ClassId {
    DOUGLAS_I,
    DOUGLAS_II,
    DOUGLAS_III,
    DOUGLAS_IV,
    DOUGLAS_COR,
    DOUGLAS_SING,
    PF_I,
    PF_II,
    PF_III,
    PF_IV,
    PF_COR,
};

inline constexpr std::array kAllClasses = {ClassId::DOUGLAS_I,   ClassId::DOUGLAS_II,  ClassId::DOUGLAS_III,
                                           ClassId::DOUGLAS_IV,  ClassId::DOUGLAS_COR, ClassId::DOUGLAS_SING,
                                           ClassId::PF_I,        ClassId::PF_II,       ClassId::PF_III,
                                           ClassId::PF_IV,       ClassId::PF_COR};

inline const char* to_string(ClassId c) {
    switch (c) {
        case ClassId::DOUGLAS_I: return "DOUGLAS_I";
        case ClassId::DOUGLAS_II: return "DOUGLAS_II";
        case ClassId::DOUGLAS_III: return "DOUGLAS_III";
        case ClassId::DOUGLAS_IV: return "DOUGLAS_IV";
        case ClassId::DOUGLAS_COR: return "DOUGLAS_COR";
        case ClassId::DOUGLAS_SING: return "DOUGLAS_SING";
        case ClassId::PF_I: return "PF_I";
        case ClassId::PF_II: return "PF_II";
        case ClassId::PF_III: return "PF_III";
        case ClassId::PF_IV: return "PF_IV";
        case ClassId::PF_COR: return "PF_COR";
    }
    return "?";
}

inline std::optional<ClassId> parse_class(const std::string& s) {
    for (ClassId c : kAllClasses)
        if (s == to_string(c)) return c;
    return std::nullopt;
}

inline bool is_projective(ClassId c) {
    return c == ClassId::PF_I || c == ClassId::PF_II || c == ClassId::PF_III || c == ClassId::PF_IV ||
           c == ClassId::PF_COR;
}

// Douglas class whose beta equation a projectively flat class inherits.
inline ClassId beta_class(ClassId c) {
    switch (c) {
        case ClassId::PF_I: return ClassId::DOUGLAS_I;
        case ClassId::PF_II: return ClassId::DOUGLAS_II;
        case ClassId::PF_III: return ClassId::DOUGLAS_III;
        case ClassId::PF_IV: return ClassId::DOUGLAS_IV;
        case ClassId::PF_COR: return ClassId::DOUGLAS_COR;
        default: return c;
    }
}

// Constants a class equation needs, read off the phi family.
struct ClassParams {
    double k1 = 0.0, k2 = 0.0, k3 = 0.0;  // I
    double c = 0.0, k = 0.0;              // II, III, IV
    double b = 0.0;                       // III, IV, SING
    int m = 1;                            // III, IV
    double sign = 1.0;                    // COR
};

inline ClassParams class_params(ClassId id, const PhiFamily& fam) {
    ClassParams p;
    auto mismatch = [&](const char* want) {
        return Error(ErrorCode::ConfigError,
                     std::string(to_string(id)) + " needs a " + want + " family, got " + family_name(fam));
    };
    switch (beta_class(id)) {
        case ClassId::DOUGLAS_I: {
            if (const auto* q = std::get_if<QuarticODE>(&fam)) {
                p.k1 = q->k1, p.k2 = q->k2, p.k3 = q->k3;
            } else {
                const KTriple t = taylor_to_k(fam);
                p.k1 = t.k1, p.k2 = t.k2, p.k3 = t.k3;
            }
            break;
        }
        case ClassId::DOUGLAS_II:
        case ClassId::DOUGLAS_COR: {
            if (const auto* f = std::get_if<SquareRootFamily>(&fam)) {
                p.c = f->c, p.k = f->k;
            } else if (const auto* q = std::get_if<QuadraticFamily>(&fam)) {
                p.c = sign_value(q->sign), p.k = 0.0;
            } else {
                throw mismatch("SquareRoot or Quadratic");
            }
            if (beta_class(id) == ClassId::DOUGLAS_COR) {
                if (p.k != 0.0 || std::fabs(p.c) != 1.0) throw mismatch("1 +- s^2");
                p.sign = p.c;
            }
            break;
        }
        case ClassId::DOUGLAS_III: {
            const auto* f = std::get_if<IntegerPower>(&fam);
            if (!f) throw mismatch("IntegerPower");
            p.b = f->b, p.c = f->c, p.k = f->k, p.m = f->m;
            break;
        }
        case ClassId::DOUGLAS_IV: {
            const auto* f = std::get_if<HalfPower>(&fam);
            if (!f) throw mismatch("HalfPower");
            p.b = f->b, p.c = f->c, p.k = f->k, p.m = f->m;
            break;
        }
        case ClassId::DOUGLAS_SING: {
            const auto* f = std::get_if<SingularB>(&fam);
            if (!f) throw mismatch("SingularB");
            p.b = f->b, p.c = f->ctilde;
            break;
        }
        default: break;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Reports

struct PointResult {
    Point p;
    double residual = 0.0;
    std::map<std::string, double> scalars;
    bool excluded = false;
    std::string note;
};

struct Tolerances {
    double douglas = 1e-7;
    double hamel = 1e-7;
    double cls = 1e-6;
    double conformality = 1e-6;
    double geodesic = 1e-5;
    bool operator==(const Tolerances&) const = default;
};

inline constexpr double kInconclusiveFraction = 0.2;

struct VerificationReport {
    std::string check;
    std::string grid;
    std::vector<PointResult> points;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    double tolerance = 0.0;
    std::size_t excluded = 0;
    std::string verdict;  // pass | fail | inconclusive | info
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
    std::map<std::string, double> summary;

    bool passed() const { return verdict == "pass"; }

    // Max and mean over non-excluded points, then the verdict.
    void finish() {
        max_residual = 0.0;
        mean_residual = 0.0;
        std::size_t used = 0;
        excluded = 0;
        for (const auto& r : points) {
            if (r.excluded) {
                ++excluded;
                continue;
            }
            max_residual = std::fmax(max_residual, r.residual);
            mean_residual += r.residual;
            ++used;
        }
        if (used) mean_residual /= double(used);
        if (used == 0 || double(excluded) > kInconclusiveFraction * double(points.size()))
            verdict = "inconclusive";
        else
            verdict = max_residual <= tolerance ? "pass" : "fail";
    }

    double max_scalar(const std::string& key) const {
        double m = 0.0;
        for (const auto& r : points)
            if (!r.excluded)
                if (auto it = r.scalars.find(key); it != r.scalars.end()) m = std::fmax(m, std::fabs(it->second));
        return m;
    }
};

// Errors that mark a sample as unusable rather than as a failure.
inline bool is_exclusion(ErrorCode c) {
    switch (c) {
        case ErrorCode::SprayFormulaSingular:
        case ErrorCode::DomainExit:
        case ErrorCode::SingularMetric:
        case ErrorCode::SingularFundamentalTensor:
        case ErrorCode::DegenerateDirection:
        case ErrorCode::NotPositive:
        case ErrorCode::NumericalBlowup: return true;
        default: return false;
    }
}

template <class Fn>
VerificationReport run_on_grid(const std::string& check, const Grid& grid, double tol, Fn&& at_point) {
    VerificationReport rep;
    rep.check = check;
    rep.grid = grid.description();
    rep.tolerance = tol;
    rep.points.reserve(grid.points.size());
    for (const auto& p : grid.points) {
        PointResult r;
        r.p = p;
        try {
            at_point(p, r);
        } catch (const Error& e) {
            if (!is_exclusion(e.code())) throw;
            r.excluded = true;
            r.note = e.what();
        }
        if (r.excluded && !r.note.empty()) {
            std::ostringstream os;
            os << "(" << p.x1 << ", " << p.x2 << ") excluded: " << r.note;
            rep.warnings.push_back(os.str());
        }
        rep.points.push_back(std::move(r));
    }
    rep.finish();
    return rep;
}

inline std::vector<Direction> unit_directions(int n) {
    std::vector<Direction> out;
    out.reserve(n);
    for (int j = 0; j < n; ++j) {
        const double th = 2.0 * std::numbers::pi * j / n;
        out.push_back({std::cos(th), std::sin(th)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Douglas polynomial test

struct DouglasFit {
    double residual = 0.0;
    std::vector<double> coefficients;  // cos^3, cos^2 sin, cos sin^2, sin^3
    std::vector<double> excluded_angles;
    int used = 0;
};

inline constexpr int kDefaultAngles = 64;
inline constexpr int kMinUsableAngles = 8;

inline constexpr double kDouglasScaleFloor = 1e-4;
// Near Delta = 0 the fundamental tensor degenerates and the spray carries
// noise of order eps / Delta^2; such directions are left out of the fit.
inline constexpr double kFitDenominator = 1e-4;

// (alpha, beta) spray restricted to well-conditioned directions with |s| <= s_limit.
inline SprayProvider douglas_provider(MetricPair pair, PhiFamily family, double s_limit = INFINITY) {
    return [pair = std::move(pair), family = std::move(family), s_limit](const Point& p, const Direction& y) {
        const SprayData d = spray_ab(pair, family, p, y);
        if (std::fabs(d.s) > s_limit) throw Error(ErrorCode::DomainExit, "direction outside the s window");
        if (std::fabs(d.Delta) < kFitDenominator)
            throw Error(ErrorCode::SprayFormulaSingular, "Delta below the fit threshold");
        return d.G;
    };
}

inline DouglasFit douglas_fit_residual(const SprayProvider& G, const Point& p, int n_angles = kDefaultAngles) {
    DouglasFit fit;
    std::vector<std::array<double, 4>> rows;
    std::vector<double> data;
    double gmax = 0.0;
    for (int j = 0; j < n_angles; ++j) {
        const double th = 2.0 * std::numbers::pi * j / n_angles;
        const double c = std::cos(th), s = std::sin(th);
        try {
            const Vec2<double> g = G(p, {c, s});
            if (!std::isfinite(g[0]) || !std::isfinite(g[1]))
                throw Error(ErrorCode::NumericalBlowup, "non-finite spray");
            gmax = std::fmax(gmax, norm(g));
            data.push_back(g[0] * s - g[1] * c);
            rows.push_back({c * c * c, c * c * s, c * s * s, s * s * s});
        } catch (const Error& e) {
            if (!is_exclusion(e.code())) throw;
            fit.excluded_angles.push_back(th);
        }
    }
    fit.used = int(data.size());
    if (fit.used < kMinUsableAngles)
        throw Error(ErrorCode::InsufficientSamples, "fewer than 8 usable directions for the cubic fit");
    Eigen::MatrixXd A(fit.used, 4);
    Eigen::VectorXd d(fit.used);
    double dmax = 0.0;
    for (int i = 0; i < fit.used; ++i) {
        for (int k = 0; k < 4; ++k) A(i, k) = rows[i][k];
        d(i) = data[i];
        dmax = std::fmax(dmax, std::fabs(data[i]));
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(d);
    fit.coefficients.assign(x.data(), x.data() + 4);
    const double misfit = (A * x - d).cwiseAbs().maxCoeff();
    // Projectively flat sprays give data that is zero up to noise; measure
    // against the spray size in that case.
    const double den = std::fmax(dmax, kDouglasScaleFloor * gmax);
    fit.residual = den > 0.0 ? misfit / den : 0.0;
    return fit;
}

inline VerificationReport douglas_check(const SprayProvider& G, const Grid& grid, double tol,
                                        int n_angles = kDefaultAngles) {
    return run_on_grid("douglas", grid, tol, [&](const Point& p, PointResult& r) {
        const DouglasFit fit = douglas_fit_residual(G, p, n_angles);
        r.residual = fit.residual;
        r.scalars["excluded_angles"] = double(fit.excluded_angles.size());
        if (fit.used < n_angles / 2) {
            r.excluded = true;
            r.note = "more than half of the directions singular";
        }
    });
}

// ---------------------------------------------------------------------------
// Hamel

inline Vec2<double> hamel_residual(const MixedJet& j, const Direction& y) {
    Vec2<double> r;
    for (int l = 0; l < 2; ++l) r[l] = j.F_xy(0, l) * y.y1 + j.F_xy(1, l) * y.y2 - j.F_x[l];
    return r;
}

inline Vec2<double> hamel_residual(const FinslerFunction& F, const Point& p, const Direction& y) {
    return hamel_residual(xy_jet(F, p, y), y);
}

// |residual| / |F_x|, with a floor so that x-independent F gives 0 instead of 0/0.
inline double hamel_relative(const FinslerFunction& F, const Point& p, const Direction& y) {
    const MixedJet j = xy_jet(F, p, y);
    const double den = std::fmax(std::hypot(j.F_x[0], j.F_x[1]), 1e-8 * std::fabs(j.F));
    const double num = norm(hamel_residual(j, y));
    return den > 0.0 ? num / den : num;
}

inline constexpr int kDefaultDirections = 16;

// s_limit restricts to directions with |beta/alpha| <= s_limit.
inline VerificationReport hamel_check(const MetricPair& pair, const PhiFamily& fam, const Grid& grid, double tol,
                                      int n_dirs = kDefaultDirections, double s_limit = INFINITY) {
    const FinslerFunction F = finsler_function(pair, fam);
    const auto dirs = unit_directions(n_dirs);
    return run_on_grid("hamel", grid, tol, [&](const Point& p, PointResult& r) {
        const Mat2<double> a = pair.a(p.vec());
        const Vec2<double> b = pair.b(p.vec());
        int used = 0;
        for (const auto& y : dirs) {
            const double s = dot(b, y.vec()) / std::sqrt(quad(a, y.vec()));
            if (std::fabs(s) > s_limit) continue;
            try {
                r.residual = std::fmax(r.residual, hamel_relative(F, p, y));
                ++used;
            } catch (const Error& e) {
                if (!is_exclusion(e.code())) throw;
            }
        }
        r.scalars["directions"] = used;
        if (used == 0) {
            r.excluded = true;
            r.note = "no usable direction";
        }
    });
}

// ---------------------------------------------------------------------------
// Classification residuals

namespace detail {

// Post-fit least squares on a few matrix entries: target = known + sum x_k basis_k.
struct EntryFit {
    std::vector<double> x;
    double residual = 0.0;
    bool rank_deficient = false;
};

inline EntryFit fit_entries(const std::vector<double>& target, const std::vector<double>& known,
                            const std::vector<std::vector<double>>& basis) {
    const int n = int(target.size());
    const int u = int(basis.size());
    EntryFit f;
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs(i) = target[i] - known[i];
    if (u == 0) {
        f.residual = rhs.cwiseAbs().maxCoeff();
        return f;
    }
    Eigen::MatrixXd A(n, u);
    for (int k = 0; k < u; ++k)
        for (int i = 0; i < n; ++i) A(i, k) = basis[k][i];
    for (int k = 0; k < u; ++k)
        if (A.col(k).norm() < 1e-14) f.rank_deficient = true;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < u) f.rank_deficient = true;
    const Eigen::VectorXd x = qr.solve(rhs);
    f.x.assign(x.data(), x.data() + u);
    f.residual = (A * x - rhs).cwiseAbs().maxCoeff();
    return f;
}

inline std::vector<double> sym_entries(const Mat2<double>& m) { return {m(0, 0), m(0, 1), m(1, 1)}; }
inline std::vector<double> all_entries(const Mat2<double>& m) { return {m.e[0], m.e[1], m.e[2], m.e[3]}; }

inline Mat2<double> bs_sym(const BetaDecomposition& d) { return outer(d.b, d.s_i) + outer(d.s_i, d.b); }

}  // namespace detail

// Closed-form d of the type II condition.
inline double class_ii_d(const ClassParams& p, double b2) {
    const double den = 1.0 - (p.k + p.c) * b2;
    if (std::fabs(den) < kSingularDenominator) throw Error(ErrorCode::SprayFormulaSingular, "1 - (k+c) b^2 = 0");
    return (3.0 * p.c - p.k - (2.0 * p.c - p.k) * p.k * b2) / den;
}

// Fits the class's beta equation at one point. Residual is the max abs entry after the fit.
inline void class_beta_at(ClassId id, const ClassParams& cp, const BetaDecomposition& d, PointResult& r) {
    using namespace detail;
    const double b2 = d.b2;
    const Mat2<double> a = d.a();
    const Mat2<double> bb = outer(d.b, d.b);
    const Mat2<double> bs = bs_sym(d);
    EntryFit f;
    switch (beta_class(id)) {
        case ClassId::DOUGLAS_I: {
            const Mat2<double> M = 2.0 * ((1.0 + cp.k1 * b2) * a + (cp.k2 * b2 + cp.k3) * bb);
            f = fit_entries(all_entries(d.bij), {0, 0, 0, 0}, {all_entries(M)});
            r.scalars["tau"] = f.x.empty() ? 0.0 : f.x[0];
            break;
        }
        case ClassId::DOUGLAS_II: {
            const Mat2<double> M =
                2.0 * ((1.0 + (2.0 * cp.c - cp.k) * b2) * a - (cp.k + 3.0 * cp.c - (cp.k + cp.c) * cp.k * b2) * bb);
            const double d7 = class_ii_d(cp, b2);
            f = fit_entries(sym_entries(d.r), sym_entries(d7 * bs), {sym_entries(M)});
            r.scalars["tau"] = f.x.empty() ? 0.0 : f.x[0];
            r.scalars["d_formula"] = d7;
            const EntryFit free = fit_entries(sym_entries(d.r), {0, 0, 0}, {sym_entries(M), sym_entries(bs)});
            if (!free.rank_deficient) {
                r.scalars["d"] = free.x[1];
                r.scalars["d_mismatch"] = std::fabs(free.x[1] - d7);
            }
            break;
        }
        case ClassId::DOUGLAS_III:
        case ClassId::DOUGLAS_IV: {
            f = fit_entries(sym_entries(d.r), sym_entries((-1.0 / b2) * bs), {});
            r.scalars["b_mismatch"] = std::fabs(std::sqrt(b2) - cp.b);
            f.residual = std::fmax(f.residual, r.scalars["b_mismatch"]);
            break;
        }
        case ClassId::DOUGLAS_COR: {
            const double sg = cp.sign;
            const double den = sg - b2;
            if (std::fabs(den) < kSingularDenominator) throw Error(ErrorCode::SprayFormulaSingular, "b^2 = +-1");
            const Mat2<double> M = 2.0 * ((1.0 + 2.0 * sg * b2) * a - 3.0 * sg * bb);
            f = fit_entries(sym_entries(d.r), sym_entries((3.0 / den) * bs), {sym_entries(M)});
            r.scalars["tau"] = f.x.empty() ? 0.0 : f.x[0];
            break;
        }
        case ClassId::DOUGLAS_SING: {
            const Mat2<double> M = 2.0 * (b2 * a - bb);
            f = fit_entries(sym_entries(d.r), sym_entries((-1.0 / b2) * bs), {sym_entries(M)});
            r.scalars["tau"] = f.x.empty() ? 0.0 : f.x[0];
            r.scalars["b_mismatch"] = std::fabs(std::sqrt(b2) - cp.b);
            f.residual = std::fmax(f.residual, r.scalars["b_mismatch"]);
            break;
        }
        default: break;
    }
    if (f.rank_deficient) {
        r.excluded = true;
        r.note = "least-squares rank deficiency";
    }
    r.residual = f.residual;
}

inline VerificationReport class_beta_residual(ClassId id, const MetricPair& pair, const ClassParams& cp,
                                              const Grid& grid, double tol) {
    return run_on_grid(std::string("class:") + to_string(id) + "/beta", grid, tol,
                       [&](const Point& p, PointResult& r) { class_beta_at(id, cp, decompose(pair, p), r); });
}

struct SprayFit {
    double c1 = 0.0, c2 = 0.0, tau = 0.0;
    bool has_tau = false;
    double residual = 0.0;
    bool rank_deficient = false;
};

// Fits G_alpha = rho y + tau E(y) + K(y) over unit directions, rho = c1 y1 + c2 y2.
inline SprayFit class_spray_fit(ClassId id, const ClassParams& cp, const BetaDecomposition& d,
                                int n_dirs = kDefaultDirections) {
    if (!is_projective(id))
        throw Error(ErrorCode::ConfigError, std::string(to_string(id)) + " has no spray identity");
    SprayFit out;
    out.has_tau = id == ClassId::PF_I || id == ClassId::PF_II || id == ClassId::PF_COR;
    const int u = out.has_tau ? 3 : 2;
    const auto dirs = unit_directions(n_dirs);
    Eigen::MatrixXd A(2 * n_dirs, u);
    Eigen::VectorXd rhs(2 * n_dirs);
    const double b2 = d.b2;
    for (int j = 0; j < n_dirs; ++j) {
        const Vec2<double> y = dirs[j].vec();
        const double al2 = quad(d.a(), y);
        const double be = dot(d.b, y);
        const double be2 = be * be;
        Vec2<double> E{0.0, 0.0}, K{0.0, 0.0};
        switch (id) {
            case ClassId::PF_I: E = (-(cp.k1 * al2 + cp.k2 * be2)) * d.b_up; break;
            case ClassId::PF_II: {
                const double den = 1.0 - (cp.c + cp.k) * b2;
                if (std::fabs(den) < kSingularDenominator)
                    throw Error(ErrorCode::SprayFormulaSingular, "1 - (c+k) b^2 = 0");
                E = (-((2.0 * cp.c - cp.k) * al2 + (cp.c + cp.k) * cp.k * be2)) * d.b_up;
                K = (((2.0 * cp.c - cp.k) * (1.0 - cp.k * b2) * al2 + cp.c * cp.k * be2) / den) * d.s_up;
                break;
            }
            case ClassId::PF_III:
                K = (-((2.0 * cp.m - 1.0) * al2 + cp.k * be2) / (2.0 * cp.m * b2)) * d.s_up;
                break;
            case ClassId::PF_IV:
                K = (-(2.0 * (cp.m - 1.0) * al2 + cp.k * be2) / ((2.0 * cp.m - 1.0) * b2)) * d.s_up;
                break;
            case ClassId::PF_COR: {
                const double den = b2 - cp.sign;
                if (std::fabs(den) < kSingularDenominator) throw Error(ErrorCode::SprayFormulaSingular, "b^2 = +-1");
                E = (-2.0 * cp.sign * al2) * d.b_up;
                K = (-2.0 * al2 / den) * d.s_up;
                break;
            }
            default: break;
        }
        const Vec2<double> G = d.chr.spray(y);
        for (int i = 0; i < 2; ++i) {
            const int row = 2 * j + i;
            A(row, 0) = y[0] * y[i];
            A(row, 1) = y[1] * y[i];
            if (out.has_tau) A(row, 2) = E[i];
            rhs(row) = G[i] - K[i];
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < u) out.rank_deficient = true;
    const Eigen::VectorXd x = qr.solve(rhs);
    out.c1 = x(0);
    out.c2 = x(1);
    if (out.has_tau) out.tau = x(2);
    out.residual = (A * x - rhs).cwiseAbs().maxCoeff();
    return out;
}

inline VerificationReport class_spray_residual(ClassId id, const MetricPair& pair, const ClassParams& cp,
                                               const Grid& grid, double tol, int n_dirs = kDefaultDirections) {
    return run_on_grid(std::string("class:") + to_string(id) + "/spray", grid, tol,
                       [&](const Point& p, PointResult& r) {
                           const SprayFit f = class_spray_fit(id, cp, decompose(pair, p), n_dirs);
                           r.residual = f.residual;
                           r.scalars["c1"] = f.c1;
                           r.scalars["c2"] = f.c2;
                           if (f.has_tau) r.scalars["tau"] = f.tau;
                           if (f.rank_deficient) {
                               // tau is free when b^i vanishes; rho still fits.
                               r.scalars["tau_undetermined"] = 1.0;
                           }
                       });
}

struct ProjectiveFactorCheck {
    double formula = 0.0;
    double direct = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;
};

// Closed-form P of a projectively flat class, using the fitted rho and tau, against F_x.y / 2F.
inline ProjectiveFactorCheck projective_factor_check(ClassId id, const MetricPair& pair, const PhiFamily& fam,
                                                     const Point& p, const Direction& y, double tol_class = 1e-6) {
    const ClassParams cp = class_params(id, fam);
    const BetaDecomposition d = decompose(pair, p);
    const SprayFit fit = class_spray_fit(id, cp, d);
    if (fit.residual > tol_class || fit.rank_deficient)
        throw Error(ErrorCode::PrerequisiteFailed,
                    std::string(to_string(id)) + " spray identity does not hold at the point");
    const Vec2<double> v = y.vec();
    const double al = std::sqrt(quad(d.a(), v));
    const double s = dot(d.b, v) / al;
    const double s0 = dot(d.s_i, v);
    const double b2 = d.b2;
    const double rho = fit.c1 * v[0] + fit.c2 * v[1];
    const PhiJet j = phi_jet(fam, s);
    double P = rho;
    switch (id) {
        case ClassId::PF_I:
            P += fit.tau * al *
                 ((1.0 + (cp.k1 + cp.k3) * s * s + cp.k2 * s * s * s * s) * j.d1 / j.phi - (cp.k1 + cp.k2 * s * s) * s);
            break;
        case ClassId::PF_II: {
            const double c = cp.c, k = cp.k;
            const double sig1 = ((k - 2 * c) * (c - k) * k * b2 + 4 * c * c - 3 * k * c + k * k) * s * s +
                                (2 * c - k) * (1 - k * b2);
            const double sig2 = (1 - (c + k) * b2) * (1 + (c - k) * s * s);
            P += -4 * c * c * s * s * s / (1 + (c - k) * s * s) * fit.tau * al + sig1 / sig2 * s0;
            break;
        }
        case ClassId::PF_III:
            P -= (s * (1 - cp.k * s * s) * j.d1 + ((2.0 * cp.m - 1) + cp.k * s * s) * j.phi) /
                 (2.0 * cp.m * b2 * j.phi) * s0;
            break;
        case ClassId::PF_IV:
            P -= (s * (1 - cp.k * b2) * j.d1 + (2.0 * (cp.m - 1) + cp.k * s * s) * j.phi) /
                 ((2.0 * cp.m - 1) * b2 * j.phi) * s0;
            break;
        case ClassId::PF_COR: {
            const double sg = cp.sign;
            P += -4 * s * s * s / (1 + sg * s * s) * fit.tau * al -
                 2 * (2 * s * s + sg) / ((b2 - sg) * (s * s + sg)) * s0;
            break;
        }
        default: break;
    }
    ProjectiveFactorCheck out;
    out.formula = P;
    out.direct = projective_factor(finsler_function(pair, fam), p, y);
    out.abs_error = std::fabs(P - out.direct);
    // P vanishes along some directions; below 1e-9 the error is taken as absolute.
    out.rel_error = out.abs_error / std::fmax(std::fabs(out.direct), 1e-9);
    return out;
}

// ---------------------------------------------------------------------------
// Conformality of deformed pairs

enum class ConformalMode { THM2, THM001 };

inline const char* to_string(ConformalMode m) { return m == ConformalMode::THM2 ? "THM2" : "THM001"; }

inline void conformality_at(ConformalMode mode, const BetaDecomposition& d, PointResult& r) {
    using namespace detail;
    EntryFit f;
    if (mode == ConformalMode::THM2) {
        f = fit_entries(sym_entries(d.r), {0, 0, 0}, {sym_entries(d.a())});
    } else {
        f = fit_entries(all_entries(d.bij), {0, 0, 0, 0}, {all_entries(d.a())});
        r.scalars["antisymmetric"] = std::fabs(d.s(0, 1));
    }
    r.scalars["lambda"] = f.x.empty() ? 0.0 : f.x[0];
    r.residual = f.residual;
}

inline VerificationReport conformality_residual(const MetricPair& pair, ConformalMode mode, const Grid& grid,
                                                double tol) {
    return run_on_grid(std::string("conformality:") + to_string(mode), grid, tol,
                       [&](const Point& p, PointResult& r) { conformality_at(mode, decompose(pair, p), r); });
}

// ---------------------------------------------------------------------------
// Scans and geodesics as reports

// Informational: reports max |s_12| and whether beta is closed at the given threshold.
inline constexpr double kClosedThreshold = 1e-8;

inline VerificationReport closedness_report(const MetricPair& pair, const Grid& grid,
                                            double threshold = kClosedThreshold) {
    VerificationReport rep;
    rep.check = "closedness";
    rep.grid = grid.description();
    rep.tolerance = threshold;
    rep.max_residual = closedness_scan(pair, grid);
    rep.verdict = "info";
    rep.summary["closed"] = rep.max_residual <= threshold ? 1.0 : 0.0;
    return rep;
}

inline constexpr double kDefaultArclength = 0.5;

// Uniform random starts (deterministic under the seed) and straightness of the traces.
// Starts whose trace leaves the domain are redrawn and counted as truncated.
inline VerificationReport geodesic_check(const MetricPair& pair, const PhiFamily& fam, double tol,
                                         std::uint64_t seed, int n_traces = 8, double arclen = kDefaultArclength,
                                         int steps = kDefaultTraceSteps, double margin = kDefaultMargin) {
    const FinslerFunction F = finsler_function(pair, fam);
    const SprayProvider G = ab_provider(pair, fam);
    std::mt19937_64 gen(seed);
    auto uniform = [&] { return double(gen() >> 11) * 0x1.0p-53; };
    const Box& box = pair.domain;
    auto inside = [&](const Point& q) { return pair.inside(q); };
    VerificationReport rep;
    rep.check = "geodesic";
    rep.grid = std::to_string(n_traces) + " seeded traces, arclength " + std::to_string(arclen);
    rep.tolerance = tol;
    rep.seed = seed;
    int attempts = 0, truncated = 0;
    while (int(rep.points.size()) < n_traces && attempts < 1000 * n_traces) {
        ++attempts;
        const Point p{box.x1_min + (box.x1_max - box.x1_min) * uniform(),
                      box.x2_min + (box.x2_max - box.x2_min) * uniform()};
        const double th = 2.0 * std::numbers::pi * uniform();
        if (!pair.admissible(p, margin)) continue;
        const Direction y{std::cos(th), std::sin(th)};
        try {
            const GeodesicTrace tr = geodesic_trace(F, G, p, y, arclen, steps, inside);
            if (tr.truncated) {
                ++truncated;
                continue;
            }
            const GeodesicTrace coarse = geodesic_trace(F, G, p, y, arclen, steps / 2, inside);
            PointResult r;
            r.p = p;
            r.scalars["angle"] = th;
            r.scalars["step_change"] = std::fabs(tr.chord_deviation - coarse.chord_deviation);
            r.residual = tr.chord_deviation;
            rep.points.push_back(std::move(r));
        } catch (const Error& e) {
            if (!is_exclusion(e.code())) throw;
            ++truncated;
        }
    }
    rep.summary["truncated"] = truncated;
    if (truncated) rep.warnings.push_back(std::to_string(truncated) + " traces left the domain and were redrawn");
    rep.finish();
    if (int(rep.points.size()) < n_traces) rep.verdict = "inconclusive";
    return rep;
}

// Both spray routes at seeded random admissible samples.
inline VerificationReport spray_crosscheck(const MetricPair& pair, const PhiFamily& fam, double tol,
                                           std::uint64_t seed, int samples = 100,
                                           double margin = kDefaultMargin) {
    const FinslerFunction F = finsler_function(pair, fam);
    std::mt19937_64 gen(seed);
    auto uniform = [&] { return double(gen() >> 11) * 0x1.0p-53; };
    const Box& box = pair.domain;
    VerificationReport rep;
    rep.check = "spray";
    rep.grid = std::to_string(samples) + " seeded random samples";
    rep.tolerance = tol;
    rep.seed = seed;
    int attempts = 0;
    while (int(rep.points.size()) < samples && attempts < 1000 * samples) {
        ++attempts;
        const Point p{box.x1_min + (box.x1_max - box.x1_min) * uniform(),
                      box.x2_min + (box.x2_max - box.x2_min) * uniform()};
        const double th = 2.0 * std::numbers::pi * uniform();
        if (!pair.admissible(p, margin)) continue;
        const Direction y{std::cos(th), std::sin(th)};
        try {
            const Vec2<double> ga = spray_ab(pair, fam, p, y).G;
            const Vec2<double> gg = spray_generic(F, p, y);
            PointResult r;
            r.p = p;
            r.scalars["angle"] = th;
            r.residual = norm(ga - gg) / std::fmax(norm(gg), 1e-300);
            if (norm(gg) == 0.0) r.residual = norm(ga);
            rep.points.push_back(std::move(r));
        } catch (const Error& e) {
            if (!is_exclusion(e.code())) throw;
        }
    }
    rep.finish();
    return rep;
}

}  // namespace finsler
