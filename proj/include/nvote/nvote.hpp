#pragma once

#include "nvote/bev_grid.hpp"
#include "nvote/config.hpp"
#include "nvote/error.hpp"
#include "nvote/evaluation.hpp"
#include "nvote/geometry.hpp"
#include "nvote/image_io.hpp"
#include "nvote/kitti_io.hpp"
#include "nvote/neighbor_vote.hpp"
#include "nvote/numeric_kernels.hpp"
#include "nvote/point_cloud.hpp"
#include "nvote/projection.hpp"
#include "nvote/render.hpp"
#include "nvote/scene_sim.hpp"
#include "nvote/text.hpp"
