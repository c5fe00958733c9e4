#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edr/pipeline.hpp"

namespace edr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDegenerate = 3;

// Flag values that override the config file.
struct ConfigOverrides {
  std::optional<std::string> mode;
  std::optional<int> components;
  std::optional<std::size_t> lags;
  std::optional<std::size_t> zscore_window;
  std::optional<int> gamma_max_lag;
  std::optional<double> eval_seconds;
  std::optional<double> segment_seconds;
};

RunConfig load_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& overrides);

struct DeriveFiles {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::filesystem::path> pool;
  std::optional<std::filesystem::path> report;
};
DeriveResult cmd_derive(const DeriveFiles& files, const RunConfig& config);

// Writes a JSON array with one metrics row per reference.
std::vector<Metrics> cmd_evaluate(const std::filesystem::path& edr_file,
                                  const std::vector<std::filesystem::path>& references,
                                  const std::filesystem::path& output, const RunConfig& config);

void cmd_synth(const std::filesystem::path& spec_file, const std::filesystem::path& out_dir);

// Full command line; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace edr
