#pragma once

// Umbrella header: the whole library.

#include "carton/common.hpp"
#include "carton/config.hpp"
#include "carton/eval.hpp"
#include "carton/geometry.hpp"
#include "carton/inference.hpp"
#include "carton/io.hpp"
#include "carton/learning.hpp"
#include "carton/matching.hpp"
#include "carton/model.hpp"
#include "carton/pipeline.hpp"
#include "carton/plane.hpp"
#include "carton/planner.hpp"
#include "carton/pointcloud.hpp"
#include "carton/roles.hpp"
#include "carton/scenario.hpp"
#include "carton/segmentation.hpp"
#include "carton/synth.hpp"
