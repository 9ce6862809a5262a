#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

enum class Errc {
  invalid_argument = 1,
  domain = 2,       // input outside the mathematical domain of the operation
  positivity = 3,   // a quantity required to be positive is not
  range = 4,        // result or trajectory leaves the representable range
  instability = 5,  // numerical scheme violated its stability contract
  json = 6,
  io = 7,
  internal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace blowup
