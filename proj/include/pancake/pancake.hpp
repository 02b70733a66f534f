#pragma once

#include "pancake/error.hpp"
#include "pancake/rng.hpp"
#include "pancake/core.hpp"
#include "pancake/distributions.hpp"
#include "pancake/adversary.hpp"
#include "pancake/pancakes.hpp"
#include "pancake/sumnorm.hpp"
#include "pancake/optimizer.hpp"
#include "pancake/analysis.hpp"
#include "pancake/io.hpp"
#include "pancake/verification.hpp"
