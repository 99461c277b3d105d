#pragma once

// Umbrella header: everything except the CLI driver.
#include "error.hpp"
#include "matrix_io.hpp"
#include "minimax_bounds.hpp"
#include "numeric.hpp"
#include "operator_frontend.hpp"
#include "problem_json.hpp"
#include "problem_model.hpp"
#include "random.hpp"
#include "rates_lab.hpp"
#include "report.hpp"
#include "simulation.hpp"
#include "truncation.hpp"
