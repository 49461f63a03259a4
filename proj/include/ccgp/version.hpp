#pragma once

namespace ccgp {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace ccgp
