#pragma once
#include <functional>
#include <tuple>
#include <type_traits>

#include "finsler/dual.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

template <class T>
using Scalar = T;

// Type-erased callable instantiated for double, D1 and D2, built from one
// generic lambda. Lets analytic closures be evaluated with or without
// derivatives through a single stored object.
template <template <class> class Ret, template <class> class... Args>
class PolyFn {
    template <class T>
    using Fn = std::function<Ret<T>(const Args<T>&...)>;

public:
    PolyFn() = default;

    template <class F>
        requires(!std::is_same_v<std::remove_cvref_t<F>, PolyFn> &&
                 std::is_invocable_v<F, const Args<double>&...>)
    PolyFn(F f)  // NOLINT(google-explicit-constructor)
        : fns_(Fn<double>(f), Fn<D1>(f), Fn<D2>(f)) {}

    template <class T>
    Ret<T> operator()(const Args<T>&... a) const {
        return std::get<Fn<T>>(fns_)(a...);
    }

    explicit operator bool() const { return static_cast<bool>(std::get<0>(fns_)); }

private:
    std::tuple<Fn<double>, Fn<D1>, Fn<D2>> fns_;
};

using ScalarField = PolyFn<Scalar, Vec2>;
using MatrixField = PolyFn<Mat2, Vec2>;
using CovectorField = PolyFn<Vec2, Vec2>;
// F(x, y): a Finsler function on the tangent bundle of a planar patch.
using FinslerFunction = PolyFn<Scalar, Vec2, Vec2>;

}  // namespace finsler
