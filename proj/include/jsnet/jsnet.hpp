#pragma once

#include "jsnet/core_model.hpp"
#include "jsnet/dcomp.hpp"
#include "jsnet/djadmm.hpp"
#include "jsnet/djist.hpp"
#include "jsnet/error.hpp"
#include "jsnet/functional.hpp"
#include "jsnet/graph.hpp"
#include "jsnet/harness.hpp"
#include "jsnet/ledger.hpp"
#include "jsnet/metrics.hpp"
#include "jsnet/plot.hpp"
#include "jsnet/rng.hpp"
#include "jsnet/run_result.hpp"
#include "jsnet/thresholding.hpp"
