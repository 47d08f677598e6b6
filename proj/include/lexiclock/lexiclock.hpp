#pragma once

#include "analytics.hpp"
#include "dataio.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "metrics.hpp"
#include "params.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "simulator.hpp"
#include "synthetic.hpp"
