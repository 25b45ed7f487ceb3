#pragma once

#include "ambidebate/backends.hpp"
#include "ambidebate/config.hpp"
#include "ambidebate/dataset.hpp"
#include "ambidebate/engine.hpp"
#include "ambidebate/errors.hpp"
#include "ambidebate/metrics.hpp"
#include "ambidebate/parsing.hpp"
#include "ambidebate/prompts.hpp"
#include "ambidebate/rng.hpp"
#include "ambidebate/types.hpp"
