// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "squidsim/analysis.hpp"
#include "squidsim/bloch.hpp"
#include "squidsim/config.hpp"
#include "squidsim/csv.hpp"
#include "squidsim/ensemble.hpp"
#include "squidsim/errors.hpp"
#include "squidsim/io.hpp"
#include "squidsim/noise.hpp"
#include "squidsim/potential.hpp"
#include "squidsim/propagate.hpp"
#include "squidsim/rng.hpp"
#include "squidsim/spectrum.hpp"
