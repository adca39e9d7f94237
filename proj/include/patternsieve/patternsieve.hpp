#pragma once

#include "patternsieve/admissible.hpp"
#include "patternsieve/core/arith.hpp"
#include "patternsieve/core/parallel.hpp"
#include "patternsieve/core/prime_table.hpp"
#include "patternsieve/core/rational.hpp"
#include "patternsieve/empirical_sums.hpp"
#include "patternsieve/pattern_scanner.hpp"
#include "patternsieve/sieve_weights.hpp"
#include "patternsieve/variational/optimize.hpp"
#include "patternsieve/variational/poly.hpp"
#include "patternsieve/variational/symmetric.hpp"
