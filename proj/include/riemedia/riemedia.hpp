#pragma once

#include "riemedia/chart.hpp"
#include "riemedia/cli.hpp"
#include "riemedia/csv.hpp"
#include "riemedia/error.hpp"
#include "riemedia/expr.hpp"
#include "riemedia/geometry.hpp"
#include "riemedia/matrix.hpp"
#include "riemedia/motion.hpp"
#include "riemedia/parser.hpp"
#include "riemedia/random_expr.hpp"
#include "riemedia/rng.hpp"
#include "riemedia/scenario.hpp"
#include "riemedia/thermo.hpp"
#include "riemedia/verify.hpp"
