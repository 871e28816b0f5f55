#pragma once

#include <stdexcept>
#include <string>

namespace ehor {

// Malformed or invalid scenario input (parse or validation).
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An iterative solve hit its cap. `loop` names the loop, `residual` is the last change seen.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string loop, double residual)
      : std::runtime_error(loop + " did not converge (last residual " + std::to_string(residual) + ")"),
        loop_(std::move(loop)),
        residual_(residual) {}

  const std::string& loop() const noexcept { return loop_; }
  double residual() const noexcept { return residual_; }

 private:
  std::string loop_;
  double residual_;
};

}  // namespace ehor
