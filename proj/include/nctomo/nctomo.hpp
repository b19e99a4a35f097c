#pragma once

#include "nctomo/bp.hpp"
#include "nctomo/builtin.hpp"
#include "nctomo/code.hpp"
#include "nctomo/error.hpp"
#include "nctomo/experiment.hpp"
#include "nctomo/fisher.hpp"
#include "nctomo/gf.hpp"
#include "nctomo/heuristics.hpp"
#include "nctomo/identifiability.hpp"
#include "nctomo/lp.hpp"
#include "nctomo/maxflow.hpp"
#include "nctomo/metrics.hpp"
#include "nctomo/mle.hpp"
#include "nctomo/orient.hpp"
#include "nctomo/paths.hpp"
#include "nctomo/random.hpp"
#include "nctomo/report.hpp"
#include "nctomo/simplex.hpp"
#include "nctomo/simulate.hpp"
#include "nctomo/topology.hpp"
