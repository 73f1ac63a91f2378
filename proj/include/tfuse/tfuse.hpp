#pragma once

#include "tfuse/cluster_gibbs.hpp"
#include "tfuse/distributions.hpp"
#include "tfuse/error.hpp"
#include "tfuse/freq_solvers.hpp"
#include "tfuse/fusion_gibbs.hpp"
#include "tfuse/metrics.hpp"
#include "tfuse/model.hpp"
#include "tfuse/permutation.hpp"
#include "tfuse/rng.hpp"
#include "tfuse/sim.hpp"
#include "tfuse/special.hpp"
#include "tfuse/version.hpp"
