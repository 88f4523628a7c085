#pragma once

namespace cqregion {
inline constexpr const char* kVersion = "1.0.0";
}
