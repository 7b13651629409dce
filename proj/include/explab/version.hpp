#pragma once

#define EXPLAB_VERSION "0.3.0"

namespace explab {
inline constexpr const char* version = EXPLAB_VERSION;
}
