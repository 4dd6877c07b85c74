#pragma once

#include "degradiag/constants.hpp"
#include "degradiag/dataio.hpp"
#include "degradiag/degradation.hpp"
#include "degradiag/diagnose.hpp"
#include "degradiag/error.hpp"
#include "degradiag/ica.hpp"
#include "degradiag/ocp.hpp"
#include "degradiag/parameters.hpp"
#include "degradiag/simulate.hpp"
#include "degradiag/trace.hpp"
