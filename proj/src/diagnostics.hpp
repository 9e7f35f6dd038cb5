#pragma once

#include <string>
#include <vector>

namespace velmat::diag {

/// Records a non-fatal warning. Repeated identical messages are stored once.
/// Thread-safe.
void warn(const std::string& message);

/// Returns and clears the warnings recorded so far.
std::vector<std::string> take_warnings();

}  // namespace velmat::diag
