#pragma once

// Everything at once.

#include "cdm/core.hpp"
#include "cdm/csv.hpp"
#include "cdm/dataset.hpp"
#include "cdm/error.hpp"
#include "cdm/rng.hpp"
#include "cdm/advice.hpp"

#include "cdm/aggregators/registry.hpp"

#include "cdm/stats/bootstrap.hpp"
#include "cdm/stats/correlation.hpp"
#include "cdm/stats/gee.hpp"
#include "cdm/stats/kruskal.hpp"
#include "cdm/stats/mann_whitney.hpp"
#include "cdm/stats/wilcoxon.hpp"

#include "cdm/simulation/campaign.hpp"
#include "cdm/simulation/metrics.hpp"

#include "cdm/synth/calibrate.hpp"
#include "cdm/synth/presets.hpp"

#include "cdm/bias/calibration.hpp"
#include "cdm/bias/demographics.hpp"
#include "cdm/bias/diversity.hpp"
#include "cdm/bias/framing.hpp"
#include "cdm/bias/group_errors.hpp"
#include "cdm/bias/timing.hpp"
#include "cdm/bias/votes.hpp"

#include "cdm/io/artifacts.hpp"
#include "cdm/io/svg.hpp"
