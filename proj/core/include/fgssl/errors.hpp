#pragma once

#include <stdexcept>
#include <string>

namespace fgssl {

// Bad experiment/CLI configuration. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable/unwritable files, malformed pixmaps or checkpoints. Exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required. Exit code 4.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

}  // namespace fgssl

// Precondition check; violations are programming or usage errors, not
// recoverable states, so they throw unconditionally in every build type.
#define FGSSL_CHECK(cond, msg)        \
  do {                                \
    if (!(cond)) ::fgssl::fail(msg);  \
  } while (0)
