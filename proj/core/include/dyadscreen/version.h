#ifndef DYADSCREEN_VERSION_H_
#define DYADSCREEN_VERSION_H_

#include <string_view>

namespace dyadscreen {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace dyadscreen

#endif  // DYADSCREEN_VERSION_H_
