#include "edr/cli.hpp"

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "edr/error.hpp"
#include "edr/io.hpp"
#include "edr/synthetic.hpp"

namespace edr {

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

RunConfig load_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& o) {
  RunConfig c;
  if (file) c = config_from_json(read_json(*file));
  nlohmann::json flags = nlohmann::json::object();
  if (o.mode) flags["mode"] = *o.mode;
  if (o.components) flags["components"] = *o.components;
  if (o.lags) flags["lags"] = *o.lags;
  if (o.zscore_window) flags["zscore_window"] = *o.zscore_window;
  if (o.gamma_max_lag) flags["gamma_max_lag"] = *o.gamma_max_lag;
  if (o.eval_seconds) flags["gamma_eval_seconds"] = *o.eval_seconds;
  if (o.segment_seconds) flags["segment_seconds"] = *o.segment_seconds;
  return config_from_json(flags, c);
}

DeriveResult cmd_derive(const DeriveFiles& files, const RunConfig& config) {
  auto leads = read_ecg_csv(files.input);
  DeriveResult res = derive(std::move(leads), config);
  write_series_csv(files.output, res.edr_signal());
  if (files.pool) write_pool_csv(*files.pool, res.estimates, res.t0);
  if (files.report) {
    auto rep = res.report();
    rep["config"] = to_json(config);
    write_json(*files.report, rep);
  }
  return res;
}

std::vector<Metrics> cmd_evaluate(const std::filesystem::path& edr_file,
                                  const std::vector<std::filesystem::path>& references,
                                  const std::filesystem::path& output, const RunConfig& config) {
  if (references.empty()) throw InputError("at least one reference is required");
  const TimedSeries edr_series = read_series_csv(edr_file);
  SampledSignal edr{edr_series.values, infer_rate(edr_series.times), edr_series.times.front()};
  std::vector<Metrics> rows;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& ref : references) {
    rows.push_back(evaluate(edr, read_series_csv(ref), config, ref.filename().string()));
    report.push_back(rows.back().to_json());
  }
  write_json(output, report);
  return rows;
}

void cmd_synth(const std::filesystem::path& spec_file, const std::filesystem::path& out_dir) {
  const SyntheticSpec spec = spec_from_json(read_json(spec_file));
  export_record(generate(spec), spec, out_dir);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"ECG-derived respiration"};
  app.require_subcommand(1);

  ConfigOverrides o;
  std::optional<std::filesystem::path> config_file;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON run configuration")->check(CLI::ExistingFile);
  };

  DeriveFiles df;
  auto* derive_cmd = app.add_subcommand("derive", "derive the ensembled EDR from an ECG CSV");
  derive_cmd->add_option("--input", df.input, "ECG CSV (time_s,lead1[,lead2])")->required();
  derive_cmd->add_option("--output", df.output, "EDR CSV")->required();
  derive_cmd->add_option("--pool", df.pool, "write every pool column to this CSV");
  derive_cmd->add_option("--report", df.report, "write the run report JSON");
  derive_cmd->add_option("--mode", o.mode, "auto, one-lead or two-lead")
      ->check(CLI::IsMember({"auto", "one-lead", "two-lead"}));
  derive_cmd->add_option("--components", o.components, "components per decomposition");
  derive_cmd->add_option("--lags", o.lags, "lag-embedding depth");
  derive_cmd->add_option("--zscore-window", o.zscore_window, "local z-score window (10 Hz samples)");
  derive_cmd->add_option("--segment-seconds", o.segment_seconds, "use only the leading segment");
  add_common(derive_cmd);

  std::filesystem::path edr_file, metrics_file;
  std::vector<std::filesystem::path> refs;
  auto* eval_cmd = app.add_subcommand("evaluate", "score an EDR against reference respiration");
  eval_cmd->add_option("--edr", edr_file, "EDR CSV")->required();
  eval_cmd->add_option("--reference", refs, "reference CSV (time_s,value); repeatable")->required();
  eval_cmd->add_option("--output", metrics_file, "metrics JSON")->required();
  eval_cmd->add_option("--gamma-max-lag", o.gamma_max_lag, "lag range for gamma (10 Hz samples)");
  eval_cmd->add_option("--eval-seconds", o.eval_seconds, "gamma evaluation window");
  add_common(eval_cmd);

  std::filesystem::path spec_file, out_dir;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic record");
  synth_cmd->add_option("--spec", spec_file, "synthetic spec JSON")->required();
  synth_cmd->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (app.got_subcommand(derive_cmd)) {
      const auto res = cmd_derive(df, load_config(config_file, o));
      std::cerr << "derived " << res.estimates.size() << " estimates from " << res.beats << " beats\n";
    } else if (app.got_subcommand(eval_cmd)) {
      for (const auto& m : cmd_evaluate(edr_file, refs, metrics_file, load_config(config_file, o))) {
        std::cerr << m.reference << ": gamma " << m.gamma << " (tau* " << m.tau_star << "), eta " << m.eta << '\n';
      }
    } else if (app.got_subcommand(synth_cmd)) {
      cmd_synth(spec_file, out_dir);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate data: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace edr
