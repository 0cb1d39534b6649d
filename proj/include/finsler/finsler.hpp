#pragma once

#include "finsler/error.hpp"
#include "finsler/dual.hpp"
#include "finsler/linalg.hpp"
#include "finsler/poly_function.hpp"
#include "finsler/diffcore.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/taylor.hpp"
#include "finsler/fields.hpp"
#include "finsler/phi.hpp"
#include "finsler/betacalc.hpp"
#include "finsler/spray.hpp"
#include "finsler/verify.hpp"
#include "finsler/constructs.hpp"
#include "finsler/expr.hpp"
