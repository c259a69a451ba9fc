#pragma once

#include <stdexcept>
#include <string>

namespace confsym {

// Error hierarchy used across the library. Every failure mode a caller can
// react to gets its own type; message text carries the specifics.

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise malformed input data.
class invalid_input_error : public error {
 public:
  using error::error;
};

/// Constructor parameters violate a documented ordering/sign constraint.
class invalid_parameter_error : public error {
 public:
  using error::error;
};

/// A trajectory left the working region (coordinate magnitude above the
/// divergence threshold). Carries the time or iterate of escape.
class divergence_error : public error {
 public:
  divergence_error(std::string what, double escape_time)
      : error(std::move(what)), escape_time_(escape_time) {}
  double escape_time() const { return escape_time_; }

 private:
  double escape_time_;
};

/// Every sampled denominator was numerically degenerate.
class degenerate_sampling_error : public error {
 public:
  using error::error;
};

/// Embedding derivative lost rank on the evaluation grid.
class degenerate_embedding_error : public error {
 public:
  using error::error;
};

/// A curve that must close up in the quotient fails to do so.
class topology_error : public error {
 public:
  using error::error;
};

/// Evaluation requested at a declared singular point.
class domain_error : public error {
 public:
  using error::error;
};

/// No intersection found on the sampled grid.
class no_intersection_error : public error {
 public:
  using error::error;
};

/// Operation undefined for this parameter regime (e.g. ratio exactly 1).
class not_applicable_error : public error {
 public:
  using error::error;
};

}  // namespace confsym
