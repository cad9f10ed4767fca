#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rdsi {

/// Failure categories. The CLI maps each one onto a fixed exit status.
enum class ErrorKind {
  parse,          // malformed input file or option
  domain,         // argument outside the mathematical domain
  assumption,     // zero-distortion assumption violated
  dimension,      // alphabet sizes do not agree
  infeasible,     // configuration cannot be satisfied (e.g. epsilon vs delta)
  resource_cap,   // enumeration or memory cap exceeded
  numerical,      // a solver failed to certify its result
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::domain: return "domain";
    case ErrorKind::assumption: return "assumption";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::resource_cap: return "resource_cap";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace rdsi
