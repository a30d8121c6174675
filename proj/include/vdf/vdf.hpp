#pragma once

#include "vdf/errors.hpp"
#include "vdf/random.hpp"
#include "vdf/graph.hpp"
#include "vdf/parity.hpp"
#include "vdf/generators.hpp"
#include "vdf/distribution.hpp"
#include "vdf/support_estimator.hpp"
#include "vdf/walk_tester.hpp"
#include "vdf/cycle_tester.hpp"
#include "vdf/truth_oracle.hpp"
#include "vdf/experiment.hpp"
