#pragma once

#include "conenav/core.hpp"
#include "conenav/fields.hpp"
#include "conenav/norms.hpp"
#include "conenav/cone_triple.hpp"
#include "conenav/spacetimes.hpp"
#include "conenav/smoothing.hpp"
#include "conenav/cones.hpp"
#include "conenav/geodesics.hpp"
#include "conenav/parallel.hpp"
#include "conenav/zermelo.hpp"
#include "conenav/scenario.hpp"
#include "conenav/catalog.hpp"
#include "conenav/invariants.hpp"
