#pragma once

#define WPTLAB_VERSION_MAJOR 0
#define WPTLAB_VERSION_MINOR 3
#define WPTLAB_VERSION_PATCH 0

namespace wptlab {
inline constexpr const char* kVersion = "0.3.0";
}
