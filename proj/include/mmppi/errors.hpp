#pragma once

#include <stdexcept>
#include <string>

namespace mmppi {

/// Raised for invalid parameters or malformed scenario files. `field` names
/// the offending entry when one is known and `line` is 1-based (0 = unknown).
class ConfigError : public std::runtime_error
{
public:
  explicit ConfigError(const std::string & message, std::string field = {}, int line = 0)
  : std::runtime_error(message), field_(std::move(field)), line_(line) {}

  const std::string & field() const noexcept {return field_;}
  int line() const noexcept {return line_;}

private:
  std::string field_;
  int line_;
};

}  // namespace mmppi
