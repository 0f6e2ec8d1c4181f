#pragma once

#include "gradft/data.hpp"
#include "gradft/experiment.hpp"
#include "gradft/gradual.hpp"
#include "gradft/model.hpp"
#include "gradft/rng.hpp"
#include "gradft/sampling.hpp"
#include "gradft/serialize.hpp"
#include "gradft/synthgen.hpp"
#include "gradft/trainer.hpp"
