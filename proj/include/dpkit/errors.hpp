#pragma once

#include <stdexcept>
#include <string>

namespace dpkit {

// Error taxonomy used across the library. The CLI maps these to exit codes:
// input/contract problems are usage-level failures, resource_error means a
// configured budget was exceeded, io_error covers file and format trouble.

struct input_error : std::runtime_error {
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

struct contract_error : std::runtime_error {
  explicit contract_error(const std::string& what) : std::runtime_error(what) {}
};

struct resource_error : std::runtime_error {
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dpkit
