#pragma once

#include <stdexcept>
#include <string>

namespace rescomp {

/// Contract check for argument validation; throws std::invalid_argument.
inline void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

}  // namespace rescomp
