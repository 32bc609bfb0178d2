#pragma once

#include "bidprice/config_file.hpp"
#include "bidprice/csv.hpp"
#include "bidprice/demand_model.hpp"
#include "bidprice/dp_optimal.hpp"
#include "bidprice/emsr.hpp"
#include "bidprice/estimator.hpp"
#include "bidprice/harness.hpp"
#include "bidprice/observation_builder.hpp"
#include "bidprice/rng.hpp"
#include "bidprice/simulator.hpp"
