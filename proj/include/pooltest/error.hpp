// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pooltest {

/// An exhaustive computation was asked to enumerate beyond its budget.
class budget_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A randomised construction ran out of retries.
class construction_failed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed design file or outcome string.
class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pooltest
