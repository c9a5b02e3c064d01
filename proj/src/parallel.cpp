#include "bornlab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace bornlab {

unsigned default_thread_count() {
  if (const char* env = std::getenv("BORNLAB_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::clamp(hw, 1u, 8u);
}

}  // namespace bornlab
