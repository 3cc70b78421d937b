// Copyright 2026 The wermeter authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WERMETER_REPORT_HPP
#define WERMETER_REPORT_HPP

#include <string>
#include <vector>

#include "wermeter/harness.hpp"

namespace wermeter::report {

// Machine-readable dump of every per-seed row.
std::string to_csv(const harness::EvaluationReport& report);

// Slash-style actual/approximated tables (percent, one decimal):
// | can-1b | 4.1/6.4 | ... |
struct SlashRow {
  std::string label;
  std::vector<std::pair<double, double>> actual_approx_pct;
};
std::string render_slash_table(const std::vector<std::string>& column_headers,
                               const std::vector<SlashRow>& rows);

// MAE tables with superscript std (two decimals): | Base | 1.03^0.03 | ... |
// Cells without a std render the mean alone.
struct MaeCell {
  double mean = 0.0;
  bool has_std = false;
  double std_dev = 0.0;
};
struct MaeRow {
  std::string label;
  std::vector<MaeCell> cells;
};
std::string render_mae_table(const std::vector<std::string>& column_headers,
                             const std::vector<MaeRow>& rows);

// Groups ablation aggregates into a variant x condition MAE table.
std::string render_ablation_table(const harness::EvaluationReport& report,
                                  const std::vector<std::string>& variant_order,
                                  const std::vector<std::string>& condition_order);

// Plot data for size-vs-MAE curves: {"series":[{"size":N,"mae":M},...]}.
std::string scaling_plot_json(const harness::EvaluationReport& report);

std::string format_fixed(double value, int decimals);

}  // namespace wermeter::report

#endif  // WERMETER_REPORT_HPP
