#pragma once

#include <stdexcept>
#include <string>

namespace regtune {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonSymmetricError : Error { using Error::Error; };
struct SingularError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };
struct NotConvergedError : Error { using Error::Error; };
struct EmptyDomainError : Error { using Error::Error; };
struct DimensionTooLargeError : Error { using Error::Error; };
struct MissingInputError : Error { using Error::Error; };
struct NonPositiveError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace regtune
