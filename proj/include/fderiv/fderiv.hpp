#pragma once

#include "fderiv/error.hpp"
#include "fderiv/function_space.hpp"
#include "fderiv/fpca.hpp"
#include "fderiv/regression.hpp"
#include "fderiv/derivative.hpp"
#include "fderiv/smallball.hpp"
#include "fderiv/simulate.hpp"
#include "fderiv/ingest.hpp"
