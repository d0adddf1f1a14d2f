#pragma once

namespace spfactor {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spfactor
