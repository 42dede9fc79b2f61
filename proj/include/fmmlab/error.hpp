#pragma once

#include <stdexcept>
#include <string>

namespace fmmlab {

// Domain error with a stable machine-readable name ("eft-overflow",
// "invalid-cost", ...) plus a human message.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

}  // namespace fmmlab
