#pragma once

#include "instrsynth/layout.hpp"
#include "instrsynth/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace instrsynth {

enum class Command { none, validate, stats, extract, synth, eval };
enum class Method { context, naive, instance_switch };

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,       // validate found problems
  kExitUsage = 2,         // unknown flags, missing required options
  kExitMissingInput = 3,  // a referenced input path does not exist
  kExitWriteFailure = 4,  // output could not be written
  kExitBadData = 5,       // inputs exist but are malformed
};

struct RunConfig {
  Command command = Command::none;
  std::uint64_t seed = 0;
  long count = 0;
  std::optional<Method> method;
  std::filesystem::path corpus, manifest, bank, out, preds, report;
  int page_w = 1166;
  int page_h = 1654;
  LayoutOptions layout;
  int ink_threshold = kDefaultInkThreshold;
  unsigned threads = 0;  // 0: hardware concurrency
  MiouMode miou_mode = MiouMode::instance;
  IouType iou_type = IouType::automatic;
  bool json_output = false;
};

/// Reads RunConfig fields from a JSON object whose keys mirror the long flag
/// names with underscores ("page_width", "scale_cap", ...).
void apply_config_json(RunConfig& cfg, std::string_view text);

/// Executes a fully populated configuration.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (flags override a --config file) and executes it.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace instrsynth
