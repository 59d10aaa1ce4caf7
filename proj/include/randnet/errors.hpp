#pragma once

#include <stdexcept>
#include <string>

namespace randnet {

// Base of every error raised by the library. Subclasses name the failure
// kind so callers can branch without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RANDNET_DEFINE_ERROR(Name)                   \
  class Name : public Error {                        \
   public:                                           \
    explicit Name(const std::string& what)           \
        : Error(std::string(#Name ": ") + what) {}   \
  };

RANDNET_DEFINE_ERROR(NonFiniteInput)
RANDNET_DEFINE_ERROR(NonFiniteValue)
RANDNET_DEFINE_ERROR(SolveFailure)
RANDNET_DEFINE_ERROR(DimensionMismatch)
RANDNET_DEFINE_ERROR(DomainError)
RANDNET_DEFINE_ERROR(NonFiniteRisk)
RANDNET_DEFINE_ERROR(NonFiniteLoss)
RANDNET_DEFINE_ERROR(EmptyCandidates)
RANDNET_DEFINE_ERROR(TooSmall)
RANDNET_DEFINE_ERROR(UsageError)

#undef RANDNET_DEFINE_ERROR

}  // namespace randnet
