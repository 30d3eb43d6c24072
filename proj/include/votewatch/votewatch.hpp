#pragma once

#include "cost.hpp"
#include "error.hpp"
#include "gaussian.hpp"
#include "io.hpp"
#include "records.hpp"
#include "rng.hpp"
#include "simlab.hpp"
#include "testing.hpp"
#include "voter_core.hpp"
