#pragma once

#include <stdexcept>

namespace taperspec {

// Every library failure derives from Error so callers can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidTaperError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct PoleError : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };
struct SingularInformationError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct OrderMismatchError : Error { using Error::Error; };
struct DegenerateSampleError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct ConvergenceError : Error { using Error::Error; };

}  // namespace taperspec
