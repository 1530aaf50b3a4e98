#pragma once

#include "chaoscale/chaos.hpp"
#include "chaoscale/error.hpp"
#include "chaoscale/experiment.hpp"
#include "chaoscale/factor.hpp"
#include "chaoscale/iterated.hpp"
#include "chaoscale/ldp.hpp"
#include "chaoscale/optimize.hpp"
#include "chaoscale/parallel.hpp"
#include "chaoscale/path.hpp"
#include "chaoscale/random.hpp"
#include "chaoscale/rough_path.hpp"
#include "chaoscale/serialize.hpp"
#include "chaoscale/skeleton.hpp"
#include "chaoscale/system.hpp"
#include "chaoscale/tail.hpp"
