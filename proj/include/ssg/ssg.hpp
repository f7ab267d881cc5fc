#pragma once

#include "baselines.hpp"
#include "end_components.hpp"
#include "game.hpp"
#include "generator.hpp"
#include "graph.hpp"
#include "model_io.hpp"
#include "oracle.hpp"
#include "partition.hpp"
#include "svi.hpp"
#include "topological.hpp"
