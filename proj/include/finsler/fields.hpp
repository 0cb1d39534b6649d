#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "finsler/diffcore.hpp"
#include "finsler/error.hpp"
#include "finsler/linalg.hpp"
#include "finsler/poly_function.hpp"

namespace finsler {

using RiemannMetricField = MatrixField;  // x -> a_ij(x)
using OneFormField = CovectorField;      // x -> b_i(x)

struct Box {
    double x1_min = -1.0;
    double x1_max = 1.0;
    double x2_min = -1.0;
    double x2_max = 1.0;

    double size() const { return std::max(x1_max - x1_min, x2_max - x2_min); }
    bool contains(const Point& p) const {
        return p.x1 >= x1_min && p.x1 <= x1_max && p.x2 >= x2_min && p.x2 <= x2_max;
    }
    bool operator==(const Box&) const = default;
};

// A curve {g = 0} where evaluation is forbidden. With positive_side set, the
// admissible region is g > 0 and everything with g <= 0 is excluded too.
struct ExcludedLocus {
    std::string description;
    ScalarField g;
    bool positive_side = false;

    // First-order distance estimate |g| / |grad g|.
    double distance(const Point& p) const {
        const D1 v = x_gradient(g, p);
        const double gn = std::hypot(v.d[0], v.d[1]);
        if (v.v == 0.0) return 0.0;
        if (gn == 0.0) return INFINITY;
        return std::fabs(v.v) / gn;
    }
    bool excludes(const Point& p, double band) const {
        if (positive_side && !(g(p.vec()) > 0.0)) return true;
        return distance(p) < band;
    }
};

struct MetricPair {
    std::string name;
    RiemannMetricField alpha;
    OneFormField beta;
    Box domain;
    std::vector<ExcludedLocus> excluded_loci;

    template <class T>
    Mat2<T> a(const Vec2<T>& x) const {
        return alpha(x);
    }
    template <class T>
    Vec2<T> b(const Vec2<T>& x) const {
        return beta(x);
    }

    // In the box and on the allowed side of every one-sided locus; no margin band.
    bool inside(const Point& p) const {
        if (!domain.contains(p)) return false;
        for (const auto& l : excluded_loci)
            if (l.positive_side && !(l.g(p.vec()) > 0.0)) return false;
        return true;
    }

    // margin is a fraction of the box size.
    bool admissible(const Point& p, double margin) const {
        if (!domain.contains(p)) return false;
        const double band = margin * domain.size();
        for (const auto& l : excluded_loci)
            if (l.excludes(p, band)) return false;
        return true;
    }
};

struct Grid {
    std::vector<Point> points;
    int n = 0;
    double margin = 0.0;
    std::size_t excluded = 0;

    std::string description() const {
        std::ostringstream os;
        os << n << "x" << n << " uniform, margin " << margin << ", " << points.size() << " points, "
           << excluded << " excluded";
        return os.str();
    }
};

inline constexpr int kDefaultGrid = 17;
inline constexpr double kDefaultMargin = 0.05;

inline Grid make_grid(const MetricPair& pair, int n = kDefaultGrid, double margin = kDefaultMargin) {
    if (n < 2) throw Error(ErrorCode::ConfigError, "grid needs at least 2 points per side");
    Grid g;
    g.n = n;
    g.margin = margin;
    const Box& b = pair.domain;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Point p{b.x1_min + (b.x1_max - b.x1_min) * i / (n - 1),
                          b.x2_min + (b.x2_max - b.x2_min) * j / (n - 1)};
            if (pair.admissible(p, margin))
                g.points.push_back(p);
            else
                ++g.excluded;
        }
    }
    return g;
}

struct Christoffel {
    std::array<Mat2<double>, 2> gamma;  // gamma[i](j, k) = Gamma^i_jk
    Mat2<double> a;
    Mat2<double> a_inv;

    // G^i_alpha = 1/2 Gamma^i_jk y^j y^k
    Vec2<double> spray(const Vec2<double>& y) const {
        return {0.5 * quad(gamma[0], y), 0.5 * quad(gamma[1], y)};
    }
};

inline Christoffel christoffel(const MetricPair& pair, const Point& p) {
    const Mat2<D1> aj = x_gradient(pair.alpha, p);
    Christoffel c;
    for (int i = 0; i < 4; ++i) c.a.e[i] = aj.e[i].v;
    const double dt = det(c.a);
    if (!(dt > 1e-14 * std::fmax(1.0, max_abs(c.a) * max_abs(c.a))))
        throw Error(ErrorCode::SingularMetric, "a_ij singular or indefinite at point");
    c.a_inv = inverse(c.a);
    // da(l, k, m) = d a_lk / dx^m
    auto da = [&](int l, int k, int m) { return aj(l, k).d[m]; };
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                double s = 0.0;
                for (int l = 0; l < 2; ++l)
                    s += c.a_inv(i, l) * (da(l, k, j) + da(l, j, k) - da(j, k, l));
                c.gamma[i](j, k) = 0.5 * s;
            }
    return c;
}

template <class T>
T beta_norm2(const MetricPair& pair, const Vec2<T>& x) {
    return quad(inverse(pair.a(x)), pair.b(x));
}

inline double beta_norm2(const MetricPair& pair, const Point& p) {
    return beta_norm2(pair, p.vec());
}

// Positive definiteness and finiteness at every grid point.
inline void validate(const MetricPair& pair, const Grid& grid) {
    for (const auto& p : grid.points) {
        const Mat2<double> a = pair.a(p.vec());
        const Vec2<double> b = pair.b(p.vec());
        for (double e : a.e)
            if (!std::isfinite(e)) throw Error(ErrorCode::NumericalBlowup, pair.name + ": non-finite a_ij");
        if (!std::isfinite(b[0]) || !std::isfinite(b[1]))
            throw Error(ErrorCode::NumericalBlowup, pair.name + ": non-finite b_i");
        if (!(a(0, 0) > 0.0 && det(a) > 0.0)) {
            std::ostringstream os;
            os << pair.name << ": a_ij not positive definite at (" << p.x1 << ", " << p.x2 << ")";
            throw Error(ErrorCode::SingularMetric, os.str());
        }
    }
}

// alpha = e^sigma |y|, beta = b e^sigma (xi y1 + eta y2) / sqrt(xi^2 + eta^2).
inline MetricPair conformal_pair(ScalarField sigma, ScalarField xi, ScalarField eta, double b, Box box,
                                 std::vector<ExcludedLocus> loci = {}, std::string name = "conformal") {
    if (!(b > 0.0)) throw Error(ErrorCode::RangeViolation, "conformal_pair needs b > 0");
    MetricPair pair;
    pair.name = std::move(name);
    pair.domain = box;
    pair.excluded_loci = std::move(loci);
    pair.alpha = [sigma](const auto& x) {
        using std::exp;
        using T = std::decay_t<decltype(x[0])>;
        const T e2 = exp(2.0 * sigma(x));
        return Mat2<T>(e2, T(0.0), T(0.0), e2);
    };
    pair.beta = [sigma, xi, eta, b](const auto& x) {
        using std::exp;
        using std::sqrt;
        using T = std::decay_t<decltype(x[0])>;
        const T u = xi(x);
        const T v = eta(x);
        const T k = b * exp(sigma(x)) / sqrt(u * u + v * v);
        return Vec2<T>(k * u, k * v);
    };
    const Grid g = make_grid(pair);
    for (const auto& p : g.points) {
        const double u = xi(p.vec());
        const double v = eta(p.vec());
        if (!(u * u + v * v > 1e-14))
            throw Error(ErrorCode::DegenerateForm, "xi = eta = 0 at a sampled point");
    }
    validate(pair, g);
    return pair;
}

}  // namespace finsler
