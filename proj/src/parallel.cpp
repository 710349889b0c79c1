#include "framechange/parallel.hpp"

#include <cstdlib>
#include <string>

namespace framechange {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

unsigned worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* cap = std::getenv("FRAMECHANGE_THREADS")) {
    try {
      const long v = std::stol(cap);
      if (v >= 1 && static_cast<unsigned long>(v) < n) n = static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // Unparseable values are ignored.
    }
  }
  return n;
}

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace framechange
