#pragma once

#include <cstddef>
#include <exception>
#include <string>
#include <vector>

#include "gstab/certify.hpp"
#include "gstab/config.hpp"

namespace gstab {

enum class ExitCode : int {
    ok = 0,
    internal = 1,
    config = 2,
    integration = 3,
    inapplicable = 4,
    invalid_argument = 5,
    io = 6,
};

struct RunOptions {
    std::string out_dir;      // empty: do not write files
    std::size_t workers = 1;
};

struct RunOutcome {
    ExitCode code = ExitCode::ok;
    std::string report_json;          // also written as report.json
    std::vector<std::string> files;   // paths written, report.json last
};

// Runs cfg.pipeline. Errors propagate as exceptions (see exit_code_for);
// an inapplicable certificate is a normal outcome with code `inapplicable`.
RunOutcome run(const ExperimentConfig& cfg, const RunOptions& opts);

// Maps an exception thrown by the library to its exit code.
ExitCode exit_code_for(const std::exception_ptr& e);

// JSON object for one certificate report (stable field order).
std::string cert_report_json(const CertReport& r);

}  // namespace gstab
