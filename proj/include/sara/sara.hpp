#pragma once

#include "sara/types.hpp"
#include "sara/config_space.hpp"
#include "sara/event_sim.hpp"
#include "sara/analytic.hpp"
#include "sara/partition.hpp"
#include "sara/rng.hpp"
#include "sara/io.hpp"
#include "sara/oracle_search.hpp"
#include "sara/adaptnet.hpp"
#include "sara/quads.hpp"
#include "sara/control.hpp"
