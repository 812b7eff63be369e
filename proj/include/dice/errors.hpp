#pragma once

#include <stdexcept>
#include <string>

namespace dice {

/// Precondition violated by a caller-supplied value.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input for which the requested quantity is not identifiable (e.g. constant action values).
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InvalidTrajectory : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidBatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidConfig : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (environment definitions, snapshots, config files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dice
