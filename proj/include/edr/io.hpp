#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "edr/estimators.hpp"
#include "edr/signalcore.hpp"

namespace edr {

// Shortest representation that parses back to the same double. Nulls
// format as the empty string.
std::string format_double(double v);
// Empty fields parse as kNull. Throws InputError on junk.
double parse_double(std::string_view field);

// Header `time_s,lead1[,lead2]`. The rate is inferred from the time column,
// which must be uniform and at least 100 Hz.
std::vector<SampledSignal> read_ecg_csv(const std::filesystem::path& path);
void write_ecg_csv(const std::filesystem::path& path, const std::vector<SampledSignal>& leads);

// Header `time_s,value`; empty values are nulls.
TimedSeries read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, const SampledSignal& series);

// One 10 Hz column per estimate, headed by its label.
void write_pool_csv(const std::filesystem::path& path, const std::vector<EdrEstimate>& estimates, double t0);

// Uniform sampling check for a time column; returns the rate, snapped to
// the nearest integer Hz when within 1e-6 relative.
double infer_rate(const std::vector<double>& times);

}  // namespace edr
