#pragma once

#include <stdexcept>
#include <string>

namespace einplan {

enum class errc {
  invalid_argument,
  parse,       // malformed einsum text or dims list
  infeasible,  // fast memory too small for the statement's access sets
  grid,        // no valid process-grid factorization for the requested P
  resource,    // iteration space exceeds the configured cap
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace einplan
