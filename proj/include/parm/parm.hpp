#pragma once

#include "parm/audit.hpp"
#include "parm/concave_qp.hpp"
#include "parm/economy.hpp"
#include "parm/errors.hpp"
#include "parm/experiments.hpp"
#include "parm/linear_program.hpp"
#include "parm/market_program.hpp"
#include "parm/mechanisms.hpp"
#include "parm/metrics.hpp"
#include "parm/penalties.hpp"
#include "parm/plan.hpp"
#include "parm/porm_equilibrium.hpp"
