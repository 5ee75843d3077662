#pragma once

#include <functional>
#include <string>

namespace vph {

using WarningHandler = std::function<void(const std::string&)>;

/// Routes a non-fatal diagnostic to the installed handler (stderr by default).
void warn(const std::string& message);

/// Installs `handler` and returns the previous one. An empty handler
/// silences warnings.
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace vph
