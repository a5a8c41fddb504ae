#pragma once

namespace greenmetrics {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace greenmetrics
