#pragma once

#include "errors.hpp"
#include "power.hpp"
#include "coefficient.hpp"
#include "model.hpp"
#include "grid.hpp"
#include "numerics.hpp"
#include "kernels.hpp"
#include "engine.hpp"
#include "case1.hpp"
#include "case2.hpp"
#include "scenario.hpp"
#include "artifact.hpp"
