#pragma once

namespace saac {
inline constexpr const char* kVersion = "0.1.0";
}
