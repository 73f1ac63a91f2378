#pragma once

namespace tfuse {
inline constexpr const char* kVersion = "0.1.0";
}
