#pragma once

#define IONTRAP_VERSION "1.0.0"

namespace iontrap {
inline constexpr const char* version() { return IONTRAP_VERSION; }
}  // namespace iontrap
