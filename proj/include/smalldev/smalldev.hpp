#pragma once

#include "smalldev/boundary.hpp"
#include "smalldev/config.hpp"
#include "smalldev/covariance.hpp"
#include "smalldev/engines.hpp"
#include "smalldev/error.hpp"
#include "smalldev/experiments.hpp"
#include "smalldev/io.hpp"
#include "smalldev/parallel.hpp"
#include "smalldev/rates.hpp"
#include "smalldev/rng.hpp"
#include "smalldev/sampler.hpp"
#include "smalldev/spectral.hpp"
#include "smalldev/svg.hpp"
