#pragma once

#include <stdexcept>
#include <string>

namespace netmsf {

/// Base of every error raised by the library. `kind()` is a stable tag used by
/// the CLI and in reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define NETMSF_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  };

NETMSF_DEFINE_ERROR(DimensionMismatch)
NETMSF_DEFINE_ERROR(BadParameter)
NETMSF_DEFINE_ERROR(ParseError)
NETMSF_DEFINE_ERROR(NumericalFailure)
NETMSF_DEFINE_ERROR(NoStableInterval)
NETMSF_DEFINE_ERROR(Infeasible)
NETMSF_DEFINE_ERROR(NonNormalNetwork)
NETMSF_DEFINE_ERROR(TimedOut)

#undef NETMSF_DEFINE_ERROR

}  // namespace netmsf
