#pragma once

#include "gmor/angle_search.hpp"
#include "gmor/axis_search.hpp"
#include "gmor/benchmark.hpp"
#include "gmor/core_geometry.hpp"
#include "gmor/correspondence.hpp"
#include "gmor/feature_matching.hpp"
#include "gmor/interval_rmq.hpp"
#include "gmor/io.hpp"
#include "gmor/rect_overlap_rmq.hpp"
#include "gmor/refinement.hpp"
#include "gmor/registration.hpp"
#include "gmor/synthetic.hpp"
