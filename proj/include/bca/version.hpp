#pragma once

namespace bca {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bca
