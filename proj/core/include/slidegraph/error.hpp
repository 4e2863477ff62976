// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace slidegraph {

/// Raised when a caller breaks an operation's precondition (shape mismatch,
/// out-of-range label, non-scalar loss, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an on-disk artifact is malformed or carries an unsupported
/// format version.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySlideError : public std::runtime_error {
 public:
  EmptySlideError() : std::runtime_error("empty slide: no patches") {}
};

inline void require(bool cond, const char* what) {
  if (!cond) throw ContractViolation(what);
}

/// Deferred message: `make_message` runs only when the check fails.
template <class F>
  requires std::is_invocable_r_v<std::string, F>
inline void require(bool cond, F&& make_message) {
  if (!cond) throw ContractViolation(std::forward<F>(make_message)());
}

}  // namespace slidegraph
