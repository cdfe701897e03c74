#pragma once

#include "nestcg/model.hpp"
#include "nestcg/labeling.hpp"
#include "nestcg/buckets.hpp"
#include "nestcg/pricing.hpp"
#include "nestcg/lp.hpp"
#include "nestcg/master.hpp"
#include "nestcg/driver.hpp"
#include "nestcg/mpcvrp.hpp"
#include "nestcg/synth.hpp"
#include "nestcg/io.hpp"
#include "nestcg/experiment.hpp"
