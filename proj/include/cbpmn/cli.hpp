#pragma once

// Subcommands behind the cbpmn executable. Each returns the process exit
// status: 0 ok, 1 validation failure, 2 runtime error, 3 verification
// property failure.

#include "cbpmn/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace cbpmn {

enum ExitCode { kExitOk = 0, kExitInvalid = 1, kExitRuntime = 2, kExitProperty = 3 };

int cmd_validate(const std::filesystem::path& bundle, std::ostream& out, std::ostream& err);

struct RunOptions {
    /// Directory receiving summary.json and trace.log; stdout when empty.
    std::optional<std::filesystem::path> out_dir;
    /// Run the bundle's ideal scenario (or the model's ideal state) instead.
    bool ideal = false;
};
int cmd_run(const std::filesystem::path& bundle, const RunOptions& opts, std::ostream& out, std::ostream& err);

struct VerifyOptions {
    std::size_t limit = 100000;
    unsigned workers = 1;
    /// Verify the declared chain instead of the one adapted by the scenario.
    bool declared = false;
    std::optional<std::filesystem::path> state_space;
};
int cmd_verify(const std::filesystem::path& bundle, const VerifyOptions& opts, std::ostream& out, std::ostream& err);

struct MetricsOptions {
    /// Activity count; defaults to the adapted chain length.
    std::optional<double> n;
    CostParams costs;
};
int cmd_metrics(const std::filesystem::path& bundle, const MetricsOptions& opts, std::ostream& out,
                std::ostream& err);

int cmd_query(const std::filesystem::path& situation, const std::string& query, std::ostream& out, std::ostream& err);

} // namespace cbpmn
