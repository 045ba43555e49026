#pragma once

// Umbrella header for the coded-random-access analysis library.

#include "cra/association_graph.hpp"
#include "cra/base_receivers.hpp"
#include "cra/channel_model.hpp"
#include "cra/coding.hpp"
#include "cra/commands.hpp"
#include "cra/config.hpp"
#include "cra/csv.hpp"
#include "cra/degree_distribution.hpp"
#include "cra/errors.hpp"
#include "cra/figures.hpp"
#include "cra/oracle.hpp"
#include "cra/poisson_receiver.hpp"
#include "cra/routing.hpp"
#include "cra/simulator.hpp"
#include "cra/verify.hpp"
#include "cra/version.hpp"
