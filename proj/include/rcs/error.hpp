#pragma once

#include <stdexcept>
#include <string>

namespace rcs {

/// Bad argument to a library call (unsupported kind, empty set, nonpositive cost, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Positive measures handed to the balanced solver carry different mass.
class MassMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two measures (or a measure and a domain) live on different ground spaces.
class DomainMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The domain cannot support the requested object (e.g. disconnected adjacency graph).
class InvalidDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A strategy or bound check was called outside its hypothesis.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed JSON input files (domain, measure, placement, strategy, experiment).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcs
