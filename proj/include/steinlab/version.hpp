#pragma once

namespace steinlab {
inline constexpr const char* kVersion = "0.1.0";
}
