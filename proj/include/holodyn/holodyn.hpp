// Umbrella header.
#pragma once

#include "holodyn/types.hpp"
#include "holodyn/dual.hpp"
#include "holodyn/polymap.hpp"
#include "holodyn/map_json.hpp"
#include "holodyn/roots.hpp"
#include "holodyn/spectrum.hpp"
#include "holodyn/qmc.hpp"
#include "holodyn/parallel.hpp"
#include "holodyn/periodic.hpp"
#include "holodyn/orbits.hpp"
#include "holodyn/noise.hpp"
#include "holodyn/julia.hpp"
#include "holodyn/conley.hpp"
#include "holodyn/perturb.hpp"
