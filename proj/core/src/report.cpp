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

#include "wermeter/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "wermeter/error.hpp"

namespace wermeter::report {

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string to_csv(const harness::EvaluationReport& report) {
  std::ostringstream out;
  out << "experiment,variant,condition,dataset,seed,mae,n,actual_rate_pct,approx_rate_pct\n";
  auto csv_escape = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += "\"\"";
      else quoted.push_back(c);
    }
    return quoted + "\"";
  };
  for (const auto& row : report.rows) {
    out << csv_escape(row.experiment) << ',' << csv_escape(row.variant) << ','
        << csv_escape(row.condition) << ',' << csv_escape(row.dataset) << ',' << row.seed << ','
        << format_fixed(row.mae, 6) << ',' << row.n << ',';
    if (row.actual_rate_pct) out << format_fixed(*row.actual_rate_pct, 4);
    out << ',';
    if (row.approx_rate_pct) out << format_fixed(*row.approx_rate_pct, 4);
    out << '\n';
  }
  return out.str();
}

std::string render_slash_table(const std::vector<std::string>& column_headers,
                               const std::vector<SlashRow>& rows) {
  std::ostringstream out;
  out << "| Model |";
  for (const auto& h : column_headers) out << ' ' << h << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < column_headers.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& row : rows) {
    if (row.actual_approx_pct.size() != column_headers.size()) {
      throw ValidationError("slash table: row '" + row.label + "' has wrong cell count");
    }
    out << "| " << row.label << " |";
    for (const auto& [actual, approx] : row.actual_approx_pct) {
      out << ' ' << format_fixed(actual, 1) << '/' << format_fixed(approx, 1) << " |";
    }
    out << '\n';
  }
  return out.str();
}

std::string render_mae_table(const std::vector<std::string>& column_headers,
                             const std::vector<MaeRow>& rows) {
  std::ostringstream out;
  out << "| Method |";
  for (const auto& h : column_headers) out << ' ' << h << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < column_headers.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& row : rows) {
    if (row.cells.size() != column_headers.size()) {
      throw ValidationError("mae table: row '" + row.label + "' has wrong cell count");
    }
    out << "| " << row.label << " |";
    for (const auto& cell : row.cells) {
      out << ' ' << format_fixed(cell.mean, 2);
      if (cell.has_std) out << '^' << format_fixed(cell.std_dev, 2);
      out << " |";
    }
    out << '\n';
  }
  return out.str();
}

std::string render_ablation_table(const harness::EvaluationReport& report,
                                  const std::vector<std::string>& variant_order,
                                  const std::vector<std::string>& condition_order) {
  std::map<std::pair<std::string, std::string>, MaeCell> cells;
  for (const auto& agg : report.aggregates()) {
    if (agg.dataset != "all") continue;
    MaeCell cell;
    cell.mean = agg.mean;
    if (agg.std_dev) {
      cell.has_std = true;
      cell.std_dev = *agg.std_dev;
    }
    cells[{agg.variant, agg.condition}] = cell;
  }
  std::vector<MaeRow> rows;
  for (const auto& variant : variant_order) {
    MaeRow row;
    row.label = variant;
    for (const auto& condition : condition_order) {
      const auto it = cells.find({variant, condition});
      if (it == cells.end()) {
        throw ValidationError("ablation table: no aggregate for (" + variant + ", " +
                              condition + ")");
      }
      row.cells.push_back(it->second);
    }
    rows.push_back(std::move(row));
  }
  return render_mae_table(condition_order, rows);
}

std::string scaling_plot_json(const harness::EvaluationReport& report) {
  nlohmann::ordered_json doc;
  doc["series"] = nlohmann::ordered_json::array();
  for (const auto& agg : report.aggregates()) {
    if (agg.experiment != "scale" || agg.dataset != "all") continue;
    if (agg.condition.rfind("n=", 0) != 0) continue;
    doc["series"].push_back(
        {{"size", std::stoull(agg.condition.substr(2))}, {"mae", agg.mean}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace wermeter::report
