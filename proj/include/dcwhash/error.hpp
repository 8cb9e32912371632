// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dcwhash {

// All toolkit errors derive from Error so callers can catch the family.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible matrix or layer shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Sample sizes, code lengths or counts that do not agree.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Input exceeds a documented capacity guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

// API misuse (bad argument values, missing state).
class UsageError : public Error {
 public:
  using Error::Error;
};

// A loss or parameter became NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace dcwhash
