#pragma once

#include <stdexcept>
#include <string>

namespace salisa {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SALISA_DECLARE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(std::string(#Name ": ") + what) {} \
  }

SALISA_DECLARE_ERROR(DimensionError);
SALISA_DECLARE_ERROR(DomainError);
SALISA_DECLARE_ERROR(InvalidBox);
SALISA_DECLARE_ERROR(InvalidInput);
SALISA_DECLARE_ERROR(SingularSystem);
SALISA_DECLARE_ERROR(IllConditioned);
SALISA_DECLARE_ERROR(GridMismatch);
SALISA_DECLARE_ERROR(DetectorError);
SALISA_DECLARE_ERROR(FormatError);
SALISA_DECLARE_ERROR(ConfigError);

#undef SALISA_DECLARE_ERROR

}  // namespace salisa
