#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hardy {

/// Base class for every error raised by the library. `name()` is the stable
/// machine-readable tag used in the CLI's JSON error objects.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual std::string_view name() const noexcept = 0;
};

#define HARDY_DEFINE_ERROR(Type)                                                 \
  class Type : public Error {                                                    \
  public:                                                                        \
    using Error::Error;                                                          \
    [[nodiscard]] std::string_view name() const noexcept override { return #Type; } \
  };

HARDY_DEFINE_ERROR(DomainError)
HARDY_DEFINE_ERROR(InversionError)
HARDY_DEFINE_ERROR(BracketError)
HARDY_DEFINE_ERROR(NoConvergence)
HARDY_DEFINE_ERROR(NotNormalizable)
HARDY_DEFINE_ERROR(TailBoundFailure)
HARDY_DEFINE_ERROR(NotIntegrable)
HARDY_DEFINE_ERROR(NoBracket)
HARDY_DEFINE_ERROR(DerivativeUnavailable)
HARDY_DEFINE_ERROR(ZeroDerivative)
HARDY_DEFINE_ERROR(LimitNotDetected)
HARDY_DEFINE_ERROR(PGeqOne)
HARDY_DEFINE_ERROR(InconclusiveProfile)
HARDY_DEFINE_ERROR(ViolationFound)
HARDY_DEFINE_ERROR(UsageError)

#undef HARDY_DEFINE_ERROR

}  // namespace hardy
