#pragma once

#include <stdexcept>
#include <string>

namespace mlexp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: CSV rows, JSON documents, store lines.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A precondition or parameter check failed before any work started.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A fit or resample call was about to observe a test-fold row.
class LeakageError : public Error {
 public:
  using Error::Error;
};

/// A stage failed while an experiment was executing.
class ExecutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlexp
