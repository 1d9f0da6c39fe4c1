#pragma once

#include "annulus/geometry.hpp"
#include "annulus/digital.hpp"
#include "annulus/curve.hpp"
#include "annulus/maps.hpp"
#include "annulus/foliation.hpp"
#include "annulus/rotation.hpp"
#include "annulus/delta.hpp"
#include "annulus/orbits.hpp"
#include "annulus/graphs.hpp"
#include "annulus/serialize.hpp"
