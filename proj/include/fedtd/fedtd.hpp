#pragma once

#include "fedtd/bounds.hpp"
#include "fedtd/errors.hpp"
#include "fedtd/fed_td.hpp"
#include "fedtd/harness.hpp"
#include "fedtd/linalg.hpp"
#include "fedtd/mrp.hpp"
#include "fedtd/perturbation.hpp"
#include "fedtd/presets.hpp"
#include "fedtd/random.hpp"
#include "fedtd/sampling.hpp"
#include "fedtd/td.hpp"
