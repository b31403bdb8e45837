// fssr/harness/report.cc
//
// Copyright 2026  FSSR Authors
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

#include "fssr/harness/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "fssr/common/error.h"

namespace fssr {
namespace harness {

ReportFormat ReportFormatFromString(const std::string &s) {
  if (s == "table") return ReportFormat::kTable;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "plot") return ReportFormat::kPlot;
  FSSR_RAISE(ErrorCode::kInvalidArgument)
      << "unknown report format '" << s << "' (expected table, csv or plot)";
}

namespace {

std::vector<std::string> MetricColumns(
    const std::vector<ExperimentRecord> &records) {
  std::set<std::string> keys;
  for (const auto &r : records)
    for (const auto &[k, v] : r.metrics) keys.insert(k);
  return {keys.begin(), keys.end()};
}

std::string FormatDouble(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// CSV cells carry full precision so records survive a round trip exactly.
std::string FormatExact(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string RenderTable(const std::vector<ExperimentRecord> &records) {
  FSSR_CHECK(!records.empty(), ErrorCode::kEmptyInput) << "no records";
  const std::vector<std::string> metric_cols = MetricColumns(records);

  std::vector<std::string> header = {"experiment", "arch", "dataset",
                                     "params", "wall_s"};
  header.insert(header.end(), metric_cols.begin(), metric_cols.end());

  std::vector<std::vector<std::string>> rows;
  for (const auto &r : records) {
    std::vector<std::string> row = {r.experiment_tag, r.arch, r.dataset,
                                    std::to_string(r.parameter_count),
                                    FormatDouble(r.wall_time_s)};
    for (const auto &k : metric_cols) {
      auto it = r.metrics.find(k);
      row.push_back(it == r.metrics.end() ? "-" : FormatDouble(it->second));
    }
    rows.push_back(std::move(row));
  }

  std::vector<size_t> width(header.size());
  for (size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto &row : rows)
    for (size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());

  std::ostringstream os;
  auto emit = [&](const std::vector<std::string> &row) {
    for (size_t c = 0; c < row.size(); ++c)
      os << std::left << std::setw(static_cast<int>(width[c]) + 2) << row[c];
    os << "\n";
  };
  emit(header);
  for (size_t c = 0; c < header.size(); ++c)
    os << std::string(width[c], '-') << "  ";
  os << "\n";
  for (const auto &row : rows) emit(row);
  return os.str();
}

std::string RenderCsv(const std::vector<ExperimentRecord> &records) {
  FSSR_CHECK(!records.empty(), ErrorCode::kEmptyInput) << "no records";
  const std::vector<std::string> metric_cols = MetricColumns(records);
  std::ostringstream os;
  os << "experiment,arch,dataset,parameter_count,wall_time_s";
  for (const auto &k : metric_cols) os << "," << k;
  os << "\n";
  for (const auto &r : records) {
    os << r.experiment_tag << "," << r.arch << "," << r.dataset << ","
       << r.parameter_count << "," << FormatExact(r.wall_time_s);
    for (const auto &k : metric_cols) {
      auto it = r.metrics.find(k);
      os << ",";
      if (it != r.metrics.end()) os << FormatExact(it->second);
    }
    os << "\n";
  }
  return os.str();
}

std::string RenderSweepSvg(const std::vector<ExperimentRecord> &records) {
  FSSR_CHECK(!records.empty(), ErrorCode::kEmptyInput) << "no records";
  // arch -> sorted (samples_per_class, top1) points.
  std::map<std::string, std::map<double, double>> curves;
  for (const auto &r : records) {
    auto n = r.metrics.find("samples_per_class");
    auto acc = r.metrics.find("top1");
    if (n == r.metrics.end() || acc == r.metrics.end()) continue;
    curves[r.arch][n->second] = acc->second;
  }
  FSSR_CHECK(!curves.empty(), ErrorCode::kEmptyInput)
      << "records carry no (samples_per_class, top1) points to plot";

  double xmin = 1e300, xmax = -1e300;
  for (const auto &[arch, pts] : curves)
    for (const auto &[x, y] : pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  if (xmax <= xmin) xmax = xmin + 1.0;

  const int W = 640, H = 420, L = 60, B = 50, Tm = 20, Rm = 140;
  auto sx = [&](double x) {
    return L + (x - xmin) / (xmax - xmin) * (W - L - Rm);
  };
  auto sy = [&](double y) { return H - B - y * (H - B - Tm); };

  const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Axes.
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - Rm
     << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L
     << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = i / 5.0;
    os << "<text x=\"" << L - 8 << "\" y=\"" << sy(y) + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << std::setprecision(2)
       << y << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << sy(y) << "\" x2=\"" << W - Rm
       << "\" y2=\"" << sy(y)
       << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  os << "<text x=\"" << (L + W - Rm) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">training samples per "
        "class</text>\n";
  os << "<text x=\"16\" y=\"" << (Tm + H - B) / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (Tm + H - B) / 2 << ")\">top-1 accuracy</text>\n";

  int ci = 0;
  for (const auto &[arch, pts] : curves) {
    const char *color = colors[ci % 5];
    std::ostringstream poly;
    for (const auto &[x, y] : pts) poly << sx(x) << "," << sy(y) << " ";
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\" points=\"" << poly.str() << "\"/>\n";
    for (const auto &[x, y] : pts)
      os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y)
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << W - Rm + 10 << "\" y=\"" << Tm + 16 + 18 * ci
       << "\" font-size=\"12\" fill=\"" << color << "\">" << arch
       << "</text>\n";
    // x tick labels from the first curve only.
    if (ci == 0)
      for (const auto &[x, y] : pts)
        os << "<text x=\"" << sx(x) << "\" y=\"" << H - B + 16
           << "\" text-anchor=\"middle\" font-size=\"11\">"
           << static_cast<int>(x) << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

std::string RenderFewShotGrid(const std::vector<ExperimentRecord> &records) {
  FSSR_CHECK(!records.empty(), ErrorCode::kEmptyInput) << "no records";
  // (n_way, k_shot) -> column; arch -> row.
  std::set<std::pair<int, int>> cells;
  std::map<std::string, std::map<std::pair<int, int>, double>> grid;
  for (const auto &r : records) {
    auto w = r.metrics.find("n_way");
    auto k = r.metrics.find("k_shot");
    auto acc = r.metrics.find("heldout_acc");
    if (acc == r.metrics.end()) acc = r.metrics.find("mean_acc");
    if (w == r.metrics.end() || k == r.metrics.end() ||
        acc == r.metrics.end())
      continue;
    const std::pair<int, int> cell{static_cast<int>(w->second),
                                   static_cast<int>(k->second)};
    cells.insert(cell);
    grid[r.arch][cell] = acc->second;
  }
  FSSR_CHECK(!grid.empty(), ErrorCode::kEmptyInput)
      << "records carry no few-shot grid metrics";

  std::ostringstream os;
  os << std::left << std::setw(14) << "arch";
  for (const auto &[way, shot] : cells) {
    std::ostringstream h;
    h << way << "-way " << shot << "-shot";
    os << std::setw(16) << h.str();
  }
  os << "\n";
  for (const auto &[arch, row] : grid) {
    os << std::left << std::setw(14) << arch;
    for (const auto &cell : cells) {
      auto it = row.find(cell);
      if (it == row.end())
        os << std::setw(16) << "-";
      else {
        std::ostringstream v;
        v << std::fixed << std::setprecision(2) << 100.0 * it->second;
        os << std::setw(16) << v.str();
      }
    }
    os << "\n";
  }
  return os.str();
}

void WriteReport(const std::vector<ExperimentRecord> &records,
                 ReportFormat format, const std::string &out_path) {
  FSSR_CHECK(!records.empty(), ErrorCode::kEmptyInput) << "no records";
  std::string body;
  switch (format) {
    case ReportFormat::kTable: {
      body = RenderTable(records);
      // A few-shot grid rides along when the records support it.
      bool has_grid = false;
      for (const auto &r : records)
        if (r.metrics.count("n_way") &&
            (r.metrics.count("heldout_acc") || r.metrics.count("mean_acc")))
          has_grid = true;
      if (has_grid) body += "\n" + RenderFewShotGrid(records);
      break;
    }
    case ReportFormat::kCsv:
      body = RenderCsv(records);
      break;
    case ReportFormat::kPlot:
      body = RenderSweepSvg(records);
      break;
  }
  std::ofstream out(out_path);
  if (!out) FSSR_RAISE(ErrorCode::kIo) << "cannot write report: " << out_path;
  out << body;
  if (!out) FSSR_RAISE(ErrorCode::kIo) << "short write: " << out_path;
}

}  // namespace harness
}  // namespace fssr
