#pragma once

#include <string>
#include <vector>

#include "dampwave/config.hpp"
#include "dampwave/report.hpp"

namespace dampwave {

const std::vector<std::string>& command_names();

/// Runs one experiment and writes its outputs plus manifest.json into cfg.out.
/// "acceptance" runs every other command into subdirectories of cfg.out.
ReportBundle run_command(const std::string& command, const RunConfig& cfg);

/// 0 success, 2 validation failure, 3 numerical failure.
int exit_code_for(const std::exception& e);

} // namespace dampwave
