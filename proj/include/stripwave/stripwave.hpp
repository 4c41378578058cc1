#pragma once

#include "common.hpp"
#include "comparison_decay.hpp"
#include "config.hpp"
#include "driver.hpp"
#include "field_energy.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "minimize.hpp"
#include "ode_oracle.hpp"
#include "polar_cutoff.hpp"
#include "potential.hpp"
#include "radial_bounds.hpp"
