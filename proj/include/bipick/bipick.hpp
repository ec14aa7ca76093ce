#pragma once

#include "bipick/config.hpp"
#include "bipick/errors.hpp"
#include "bipick/extremal.hpp"
#include "bipick/hyperbolic.hpp"
#include "bipick/normalize.hpp"
#include "bipick/numerics.hpp"
#include "bipick/pick.hpp"
#include "bipick/realization.hpp"
#include "bipick/solve.hpp"
#include "bipick/types.hpp"
