#ifndef RLMUT_CHECKSUM_HPP_
#define RLMUT_CHECKSUM_HPP_

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

namespace rlmut {

// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(std::span<const unsigned char> bytes) {
    for (unsigned char b : bytes) {
      hash_ ^= b;
      hash_ *= 0x100000001b3ULL;
    }
  }

  void update(std::string_view text) {
    update(std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
  }

  template <typename T>
  void update_value(const T& value) {
    update(std::span(reinterpret_cast<const unsigned char*>(&value), sizeof(T)));
  }

  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace rlmut

#endif  // RLMUT_CHECKSUM_HPP_
