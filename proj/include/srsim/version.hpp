#pragma once

namespace srsim {

inline constexpr const char* version = "0.1.0";

}
