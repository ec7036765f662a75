#pragma once

namespace dczip {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dczip
