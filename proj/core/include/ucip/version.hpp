#pragma once

namespace ucip {

inline constexpr const char* kArtifactVersion = "0.1.0";

} // namespace ucip
