#pragma once

#include <string>
#include <vector>

#include "vph/log.hpp"

namespace vph::test {

// Collects warnings for the lifetime of the guard.
class WarningCapture {
 public:
  WarningCapture() {
    previous_ = set_warning_handler([this](const std::string& m) { messages_.push_back(m); });
  }
  ~WarningCapture() { set_warning_handler(previous_); }
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
  WarningHandler previous_;
};

inline std::string fixture(const std::string& name) {
  return std::string(VPH_FIXTURE_DIR) + "/" + name;
}

}  // namespace vph::test
