#pragma once

namespace pottsseg {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace pottsseg
