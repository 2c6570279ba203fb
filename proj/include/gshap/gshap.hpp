#pragma once

// Umbrella header.

#include "gshap/coalition.hpp"
#include "gshap/contribution.hpp"
#include "gshap/csv.hpp"
#include "gshap/errors.hpp"
#include "gshap/experiment.hpp"
#include "gshap/gaussian.hpp"
#include "gshap/lemmas.hpp"
#include "gshap/model.hpp"
#include "gshap/parallel.hpp"
#include "gshap/partition.hpp"
#include "gshap/plot.hpp"
#include "gshap/rng.hpp"
#include "gshap/shapley.hpp"
#include "gshap/verify.hpp"
#include "gshap/version.hpp"
