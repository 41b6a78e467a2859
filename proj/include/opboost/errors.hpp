#pragma once

#include <stdexcept>
#include <string>

namespace opboost {

// error taxonomy mirrors the CLI exit codes: config=2, data=3, protocol=4

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace opboost
