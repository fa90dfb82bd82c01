#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>

#include "promptevo/config.hpp"

namespace promptevo {

enum ExitCode : int { kExitOk = 0, kExitPipelineError = 1, kExitConfigError = 2 };

/// Runs `body`, mapping ConfigError to exit 2 and any other failure to exit 1 with a one-line cause.
int guarded(std::ostream& err, const std::function<void()>& body);

int cmd_optimize(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, const std::filesystem::path& prompt_file,
                 const std::optional<std::filesystem::path>& plan_file, std::ostream& out, std::ostream& err);
int cmd_classify(const RunConfig& config, std::ostream& out, std::ostream& err);
/// `source` is an output directory or a generations.jsonl file.
int cmd_report(const std::filesystem::path& source, std::ostream& out, std::ostream& err);

}  // namespace promptevo
