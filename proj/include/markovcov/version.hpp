#pragma once

namespace markovcov {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace markovcov
