#pragma once

#include "swarmseek/ascent.hpp"
#include "swarmseek/common.hpp"
#include "swarmseek/config.hpp"
#include "swarmseek/dynamics.hpp"
#include "swarmseek/field.hpp"
#include "swarmseek/harness.hpp"
#include "swarmseek/io.hpp"
#include "swarmseek/ode.hpp"
#include "swarmseek/rng.hpp"
#include "swarmseek/swarm.hpp"
#include "swarmseek/verify.hpp"
