#pragma once

#include "tcsnn/error.hpp"
#include "tcsnn/fixed_point.hpp"
#include "tcsnn/rng.hpp"
#include "tcsnn/spike.hpp"
#include "tcsnn/event_file.hpp"
#include "tcsnn/compress.hpp"
#include "tcsnn/neuron.hpp"
#include "tcsnn/network.hpp"
#include "tcsnn/simulator.hpp"
#include "tcsnn/parallel.hpp"
#include "tcsnn/learning.hpp"
#include "tcsnn/metrics.hpp"
#include "tcsnn/config.hpp"
#include "tcsnn/experiment.hpp"
#include "tcsnn/reference.hpp"
