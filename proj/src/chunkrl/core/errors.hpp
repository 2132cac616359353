#pragma once

#include <stdexcept>
#include <string>

namespace chunkrl {

// Base class for all engine errors so callers can catch broadly.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedCombination : Error {
  using Error::Error;
};
struct GranularityOrderViolation : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};
struct BadResetId : Error {
  using Error::Error;
};
struct HeadMismatch : Error {
  using Error::Error;
};
struct NonFinite : Error {
  using Error::Error;
};
struct DegenerateGroup : Error {
  using Error::Error;
};
struct SkipUpdate : Error {
  using Error::Error;
};
struct InvalidPlan : Error {
  using Error::Error;
};
struct MemoryOverflow : Error {
  using Error::Error;
};
struct EmptyTrace : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

} // namespace chunkrl
