#pragma once

#include "twinbeam/analysis.hpp"
#include "twinbeam/collection.hpp"
#include "twinbeam/config.hpp"
#include "twinbeam/detection.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/oracle.hpp"
#include "twinbeam/pipeline.hpp"
#include "twinbeam/report.hpp"
#include "twinbeam/rng.hpp"
#include "twinbeam/series.hpp"
#include "twinbeam/source.hpp"
#include "twinbeam/stats.hpp"
