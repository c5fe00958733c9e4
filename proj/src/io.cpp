#include "edr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "edr/error.hpp"

namespace edr {

std::string format_double(double v) {
  if (is_null(v)) return {};
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw InputError("cannot format value");
  return std::string(buf, ptr);
}

double parse_double(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (field.empty()) return kNull;
  if (field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw InputError("malformed number '" + std::string(field) + "'");
  }
  return v;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  for (auto f : split(line)) t.header.push_back(trim(f));
  t.columns.resize(t.header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != t.header.size()) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(t.header.size()) + " fields");
    }
    try {
      for (std::size_t c = 0; c < fields.size(); ++c) t.columns[c].push_back(parse_double(fields[c]));
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return t;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace

double infer_rate(const std::vector<double>& times) {
  if (times.size() < 2) throw InputError("need at least two samples to infer the rate");
  for (double t : times) {
    if (is_null(t)) throw InputError("null time stamp");
  }
  const double span = times.back() - times.front();
  if (!(span > 0.0)) throw InputError("time column must increase");
  double rate = static_cast<double>(times.size() - 1) / span;
  const double nearest = std::round(rate);
  if (nearest > 0.0 && std::abs(rate - nearest) <= 1e-6 * nearest) rate = nearest;
  const double dt = 1.0 / rate;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (std::abs(step - dt) > 1e-3 * dt) throw InputError("time column is not uniformly sampled");
  }
  return rate;
}

std::vector<SampledSignal> read_ecg_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  if (t.header.size() < 2 || t.header.size() > 3 || t.header[0] != "time_s" || t.header[1] != "lead1" ||
      (t.header.size() == 3 && t.header[2] != "lead2")) {
    throw InputError(path.string() + ": header must be time_s,lead1[,lead2]");
  }
  const double rate = infer_rate(t.columns[0]);
  if (rate < 100.0) throw InputError(path.string() + ": sampling rate below 100 Hz");
  std::vector<SampledSignal> leads;
  for (std::size_t c = 1; c < t.columns.size(); ++c) {
    for (double v : t.columns[c]) {
      if (is_null(v)) throw InputError(path.string() + ": missing ECG sample");
    }
    leads.push_back(SampledSignal{t.columns[c], rate, t.columns[0].front()});
  }
  return leads;
}

void write_ecg_csv(const std::filesystem::path& path, const std::vector<SampledSignal>& leads) {
  if (leads.empty()) throw InputError("no leads to write");
  auto out = open_out(path);
  out << "time_s";
  for (std::size_t k = 0; k < leads.size(); ++k) out << ",lead" << (k + 1);
  out << '\n';
  const auto& ref = leads.front();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    out << format_double(ref.time_at(i));
    for (const auto& lead : leads) out << ',' << format_double(lead.samples.at(i));
    out << '\n';
  }
}

TimedSeries read_series_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  if (t.header.size() != 2 || t.header[0] != "time_s") {
    throw InputError(path.string() + ": header must be time_s,value");
  }
  TimedSeries s{t.columns[0], t.columns[1]};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_null(s.times[i]) || (i > 0 && !(s.times[i] > s.times[i - 1]))) {
      throw InputError(path.string() + ": time column must be strictly increasing");
    }
  }
  return s;
}

void write_series_csv(const std::filesystem::path& path, const SampledSignal& series) {
  auto out = open_out(path);
  out << "time_s,value\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_double(series.time_at(i)) << ',' << format_double(series.samples[i]) << '\n';
  }
}

void write_pool_csv(const std::filesystem::path& path, const std::vector<EdrEstimate>& estimates, double t0) {
  auto out = open_out(path);
  out << "time_s";
  std::size_t len = 0;
  for (const auto& e : estimates) {
    out << ',' << e.label();
    len = std::max(len, e.series10.size());
  }
  out << '\n';
  for (std::size_t i = 0; i < len; ++i) {
    out << format_double(t0 + static_cast<double>(i) / 10.0);
    for (const auto& e : estimates) out << ',' << (i < e.series10.size() ? format_double(e.series10[i]) : "");
    out << '\n';
  }
}

}  // namespace edr
