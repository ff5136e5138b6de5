#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bwc {

// All arithmetic in the toolchain is 32-bit two's-complement wrapping:
// source interpreter, rewrite oracle and simulator must agree bit for bit.
inline int32_t wadd(int32_t a, int32_t b) {
  return static_cast<int32_t>(static_cast<uint32_t>(a) + static_cast<uint32_t>(b));
}
inline int32_t wsub(int32_t a, int32_t b) {
  return static_cast<int32_t>(static_cast<uint32_t>(a) - static_cast<uint32_t>(b));
}
inline int32_t wmul(int32_t a, int32_t b) {
  return static_cast<int32_t>(static_cast<uint32_t>(a) * static_cast<uint32_t>(b));
}

struct SrcLoc {
  int line = 0;
  int col = 0;
};

// Base class for all toolchain errors. Subclasses carry a stable kind()
// string so tests can assert on the error category without string-matching
// the human-readable message.
class Error : public std::runtime_error {
public:
  Error(std::string kind, std::string message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

}  // namespace bwc
