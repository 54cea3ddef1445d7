#pragma once

#include "fmcf/barriers.hpp"
#include "fmcf/closed_forms.hpp"
#include "fmcf/curvature.hpp"
#include "fmcf/errors.hpp"
#include "fmcf/flow.hpp"
#include "fmcf/geometry.hpp"
#include "fmcf/io.hpp"
#include "fmcf/oracle.hpp"
#include "fmcf/scenarios.hpp"
#include "fmcf/shapes.hpp"
