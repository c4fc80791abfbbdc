#pragma once

namespace vcsim {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "vcsim";

}  // namespace vcsim
