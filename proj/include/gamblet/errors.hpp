#pragma once

#include <stdexcept>
#include <string>

namespace gamblet {

/// Failure inside a numerical stage (CG breakdown, loss of definiteness).
/// `stage()` names the pipeline step so the CLI can report it.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace gamblet
