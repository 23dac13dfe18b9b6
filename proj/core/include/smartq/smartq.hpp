#pragma once

#include "smartq/allocation.hpp"
#include "smartq/design.hpp"
#include "smartq/format.hpp"
#include "smartq/grid.hpp"
#include "smartq/inference.hpp"
#include "smartq/policy.hpp"
#include "smartq/rng.hpp"
#include "smartq/simulator.hpp"
#include "smartq/sweep.hpp"
#include "smartq/types.hpp"
