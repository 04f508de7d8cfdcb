#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "selcal/synth.hpp"

namespace selcal::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kAdapterError = 3,
};

struct CliConfig {
  std::string subcommand;
  std::filesystem::path predictions;
  std::optional<std::filesystem::path> gold;
  std::vector<std::string> methods = {"likelihood", "repetition", "diversity", "avg-bleu"};
  std::vector<double> acc_targets = {60.0, 70.0, 80.0};
  int bins = 10;
  std::string classifier = "em";
  double threshold = 0.5;
  std::string sim_mode = "word";
  int max_order = 4;
  std::optional<std::string> adapter_cmd;
  std::string adapter_name = "ext";
  std::optional<std::string> format;
  std::optional<std::filesystem::path> out;  // stdout when unset or "-"
  std::optional<std::filesystem::path> curves_dir;
  std::string curve_format = "csv";
  unsigned jobs = 0;  // 0 = hardware concurrency
  SynthConfig synth;
};

// Each command writes its primary artifact to config.out (or `out`) and
// diagnostics to `err`, and returns an ExitCode.
int cmd_evaluate(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_score(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_synth(const CliConfig& config, std::ostream& out, std::ostream& err);

// Full argument vector including the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace selcal::cli
