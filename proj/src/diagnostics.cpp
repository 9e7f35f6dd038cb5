#include "diagnostics.hpp"

#include <algorithm>
#include <mutex>

namespace velmat::diag {

namespace {
std::mutex g_mutex;
std::vector<std::string> g_warnings;
}  // namespace

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (std::find(g_warnings.begin(), g_warnings.end(), message) == g_warnings.end()) g_warnings.push_back(message);
}

std::vector<std::string> take_warnings() {
  std::lock_guard lock(g_mutex);
  std::vector<std::string> out;
  out.swap(g_warnings);
  return out;
}

}  // namespace velmat::diag
