#pragma once

// Umbrella header: the whole library.

#include "viewloom/degrade.hpp"
#include "viewloom/error.hpp"
#include "viewloom/frame_plan.hpp"
#include "viewloom/geometry.hpp"
#include "viewloom/image.hpp"
#include "viewloom/loss_weights.hpp"
#include "viewloom/manifest.hpp"
#include "viewloom/masks.hpp"
#include "viewloom/metrics.hpp"
#include "viewloom/png_io.hpp"
#include "viewloom/pose_io.hpp"
#include "viewloom/random.hpp"
#include "viewloom/scheduler.hpp"
#include "viewloom/trajectory.hpp"
