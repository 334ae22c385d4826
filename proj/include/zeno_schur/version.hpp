#pragma once

namespace zeno_schur {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace zeno_schur
