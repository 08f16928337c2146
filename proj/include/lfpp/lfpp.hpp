#pragma once

#include "lfpp/band_source.hpp"
#include "lfpp/crossing_build.hpp"
#include "lfpp/crossing_layout.hpp"
#include "lfpp/crossing_params.hpp"
#include "lfpp/dgff.hpp"
#include "lfpp/errors.hpp"
#include "lfpp/eta_field.hpp"
#include "lfpp/exponent.hpp"
#include "lfpp/field_io.hpp"
#include "lfpp/fpp.hpp"
#include "lfpp/geometry.hpp"
#include "lfpp/grid.hpp"
#include "lfpp/lqg.hpp"
#include "lfpp/parallel.hpp"
#include "lfpp/polypath.hpp"
#include "lfpp/rng.hpp"
