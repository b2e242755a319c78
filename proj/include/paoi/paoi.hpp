#pragma once

#include "paoi/analytic.hpp"
#include "paoi/commands.hpp"
#include "paoi/config.hpp"
#include "paoi/csv.hpp"
#include "paoi/distributions.hpp"
#include "paoi/errors.hpp"
#include "paoi/extended_real.hpp"
#include "paoi/optimizer.hpp"
#include "paoi/policy.hpp"
#include "paoi/simulator.hpp"
