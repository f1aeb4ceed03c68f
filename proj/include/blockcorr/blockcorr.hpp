#pragma once

#include "blockcorr/analytics.hpp"
#include "blockcorr/blockage.hpp"
#include "blockcorr/errors.hpp"
#include "blockcorr/experiment.hpp"
#include "blockcorr/mobility.hpp"
#include "blockcorr/monte_carlo.hpp"
#include "blockcorr/parallel.hpp"
#include "blockcorr/random.hpp"
