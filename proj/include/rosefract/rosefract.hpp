#pragma once

#include "core.hpp"
#include "fractal.hpp"
#include "gaussian.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "macroscopic.hpp"
#include "occupation.hpp"
#include "oracles.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "rosenblatt.hpp"
#include "stats.hpp"
