#pragma once

#include "pfrac/assembly.hpp"
#include "pfrac/baselines.hpp"
#include "pfrac/config.hpp"
#include "pfrac/material.hpp"
#include "pfrac/mesh.hpp"
#include "pfrac/nucleation.hpp"
#include "pfrac/output.hpp"
#include "pfrac/presets.hpp"
#include "pfrac/staggered.hpp"
