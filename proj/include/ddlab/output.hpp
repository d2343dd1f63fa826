#pragma once

// Result files. CSV starts with a version line, then
//   sweep,axis,n,p,k,gamma,trials,emp_excess_mean,emp_excess_se,emp_total_mean,theory_excess,theory_total
// with empty fields for values that do not apply. Numbers use %.17g, lines end in LF.

#include <filesystem>
#include <string>

#include "ddlab/harness.hpp"

namespace ddlab {

inline constexpr int kResultsSchemaVersion = 1;

std::string format_number(double v);

std::string format_csv(const SweepConfig& cfg, const RiskCurve& curve);
std::string format_json(const SweepConfig& cfg, const RiskCurve& curve);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ddlab
