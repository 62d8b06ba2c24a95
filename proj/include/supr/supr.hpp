#pragma once

#include "supr/config.hpp"
#include "supr/core.hpp"
#include "supr/criteria.hpp"
#include "supr/linear.hpp"
#include "supr/pgm.hpp"
#include "supr/pipeline.hpp"
#include "supr/rng.hpp"
#include "supr/superiorize.hpp"
#include "supr/tomo.hpp"
#include "supr/trace.hpp"
#include "supr/vec.hpp"
