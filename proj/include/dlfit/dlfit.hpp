#pragma once

#include "bisim.hpp"
#include "cnf.hpp"
#include "concept.hpp"
#include "database.hpp"
#include "decimal.hpp"
#include "driver.hpp"
#include "encode.hpp"
#include "eval.hpp"
#include "external_solver.hpp"
#include "generators.hpp"
#include "metrics.hpp"
#include "parser.hpp"
#include "polyfit.hpp"
#include "reduce.hpp"
#include "solver.hpp"
#include "topology.hpp"
