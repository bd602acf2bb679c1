#pragma once

#include <stdexcept>
#include <string>

namespace steinflow {

/// Invalid arguments or configuration (bad dimensions, out-of-range values).
class parameter_error : public std::invalid_argument {
 public:
  explicit parameter_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical failure at runtime (non-finite values, singular systems).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Number of worker threads for intra-run pairwise sums. Initialized from
/// STEINFLOW_THREADS (default 1); results are bit-identical for any value
/// because partial sums are always combined in a fixed order.
int thread_count();
void set_thread_count(int n);

/// When on (the default), pairwise sums run in value-sorted particle order,
/// making results bitwise independent of particle storage order. Off skips
/// the sort; results then depend (at roundoff level) on storage order.
bool deterministic_mode();
void set_deterministic_mode(bool on);

/// Numeric failure inside an iterative run, tagged with the iteration.
class run_error : public numeric_error {
 public:
  run_error(const std::string& msg, long iteration)
      : numeric_error(msg + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

}  // namespace steinflow
