#pragma once

#include "crossproj/error.hpp"
#include "crossproj/features.hpp"
#include "crossproj/geometry.hpp"
#include "crossproj/io/binary.hpp"
#include "crossproj/io/pgm.hpp"
#include "crossproj/io/ply.hpp"
#include "crossproj/io/text.hpp"
#include "crossproj/linker.hpp"
#include "crossproj/parallel.hpp"
#include "crossproj/synth.hpp"
#include "crossproj/transfer.hpp"
#include "crossproj/views.hpp"
#include "crossproj/voxelgrid.hpp"

#ifndef CROSSPROJ_VERSION_STRING
#define CROSSPROJ_VERSION_STRING "0.1.0"
#endif

namespace crossproj {

/// Semantic version of the library.
inline constexpr const char* version() noexcept { return CROSSPROJ_VERSION_STRING; }

}  // namespace crossproj
