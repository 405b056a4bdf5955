#pragma once

#include "wim/bounds.hpp"
#include "wim/distributions.hpp"
#include "wim/empirical.hpp"
#include "wim/error.hpp"
#include "wim/experiment.hpp"
#include "wim/impact.hpp"
#include "wim/io.hpp"
#include "wim/network_simplex.hpp"
#include "wim/numeric.hpp"
#include "wim/posterior.hpp"
#include "wim/rng.hpp"
#include "wim/sampler.hpp"
#include "wim/transport.hpp"
