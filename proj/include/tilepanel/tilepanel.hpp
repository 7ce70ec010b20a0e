#pragma once

// Umbrella header.
#include "tilepanel/bundle_io.hpp"
#include "tilepanel/cmat_io.hpp"
#include "tilepanel/compat.hpp"
#include "tilepanel/evaluation.hpp"
#include "tilepanel/ga.hpp"
#include "tilepanel/geometry.hpp"
#include "tilepanel/image.hpp"
#include "tilepanel/png_io.hpp"
#include "tilepanel/puzzle.hpp"
#include "tilepanel/synthetic.hpp"
