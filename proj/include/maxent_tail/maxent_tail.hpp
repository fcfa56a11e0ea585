#pragma once

#include "maxent_tail/constraints.hpp"
#include "maxent_tail/density.hpp"
#include "maxent_tail/errors.hpp"
#include "maxent_tail/gaussian_world.hpp"
#include "maxent_tail/maxent.hpp"
#include "maxent_tail/multiperiod.hpp"
#include "maxent_tail/portfolio_barbell.hpp"
#include "maxent_tail/random.hpp"
#include "maxent_tail/special_numerics.hpp"
#include "maxent_tail/stats.hpp"
