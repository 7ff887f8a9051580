#ifndef VIRAL_UTIL_HPP
#define VIRAL_UTIL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace viral {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

std::string read_file(const std::string& path);
// Truncates and writes; throws IoError with the path on failure.
void write_file(const std::string& path, std::string_view content);

std::vector<std::string_view> split(std::string_view s, char sep);

// 64-bit FNV-1a; stable across platforms, used for cache keys.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace viral

#endif  // VIRAL_UTIL_HPP
