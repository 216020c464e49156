#pragma once

#include "microbroker/broker.hpp"
#include "microbroker/common.hpp"
#include "microbroker/contracts.hpp"
#include "microbroker/engine.hpp"
#include "microbroker/evolve.hpp"
#include "microbroker/loads.hpp"
#include "microbroker/metrics.hpp"
#include "microbroker/neuro.hpp"
#include "microbroker/output.hpp"
#include "microbroker/policy.hpp"
#include "microbroker/report.hpp"
#include "microbroker/scenario.hpp"
#include "microbroker/supply.hpp"
#include "microbroker/timeseries.hpp"
