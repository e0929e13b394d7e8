#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace acvkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// The regularization weight lives in [0, inf]. Infinity is a distinguished
// value meaning "return argmin of the regularizer", never a large float.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline bool is_infinite(double lambda) { return std::isinf(lambda) && lambda > 0; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Execution policy for fold and grid loops. Serial is the reference path;
// Parallel must produce bitwise identical results.
enum class Exec { Serial, Parallel };

// Runs body(i) for i in [0, count). Exceptions are captured per index and the
// lowest-index one is rethrown after the loop so errors are deterministic.
template <class Body>
void for_each_index(int count, Exec exec, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<size_t>(count));
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (int i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace acvkit
