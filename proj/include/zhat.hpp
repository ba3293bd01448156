#pragma once

#include "zhat/analytic.hpp"
#include "zhat/compiled_set.hpp"
#include "zhat/density.hpp"
#include "zhat/errors.hpp"
#include "zhat/expr.hpp"
#include "zhat/io.hpp"
#include "zhat/measure.hpp"
#include "zhat/numeric.hpp"
#include "zhat/polynomial.hpp"
#include "zhat/primes.hpp"
#include "zhat/residue_image.hpp"
#include "zhat/sequences.hpp"
#include "zhat/supernatural.hpp"
#include "zhat/verify.hpp"
