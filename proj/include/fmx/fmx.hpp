#pragma once

#include "fmx/error.hpp"
#include "fmx/params.hpp"
#include "fmx/quadrature.hpp"
#include "fmx/kernels.hpp"
#include "fmx/time_grid.hpp"
#include "fmx/parallel.hpp"
#include "fmx/soe.hpp"
#include "fmx/fracops.hpp"
#include "fmx/modal.hpp"
#include "fmx/field.hpp"
#include "fmx/estimates.hpp"
#include "fmx/scenario.hpp"
#include "fmx/report.hpp"
#include "fmx/suite.hpp"
