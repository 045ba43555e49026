#pragma once

namespace cra {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cra
