#pragma once

#define HIETAN_VERSION "0.3.0"

namespace hietan {
inline constexpr const char* kVersion = HIETAN_VERSION;
}
