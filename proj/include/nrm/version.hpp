#pragma once

#define NRM_VERSION_MAJOR 0
#define NRM_VERSION_MINOR 1
#define NRM_VERSION_PATCH 0
#define NRM_VERSION_STRING "0.1.0"

namespace nrm {
inline constexpr const char* kVersion = NRM_VERSION_STRING;
}  // namespace nrm
