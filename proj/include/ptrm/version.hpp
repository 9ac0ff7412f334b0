#pragma once

#include <string_view>

namespace ptrm {

inline constexpr std::string_view kToolName = "ptrm";
inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace ptrm
