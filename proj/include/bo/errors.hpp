#ifndef BO_ERRORS_HPP
#define BO_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace bo {

/// Bad configuration or argument (maps to exit/status code 2).
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Solution blew up; carries the last time the state was still finite
/// (maps to exit/status code 3).
class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// Iterative control solve failed to converge (maps to exit/status code 4).
/// Carries the residual (CG) or increment (Picard) history.
class nonconvergence_error : public std::runtime_error {
 public:
  nonconvergence_error(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace bo

#endif
