// fssr/harness/report.h
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

#ifndef FSSR_HARNESS_REPORT_H_
#define FSSR_HARNESS_REPORT_H_

#include <string>
#include <vector>

#include "fssr/harness/train.h"

namespace fssr {
namespace harness {

enum class ReportFormat { kTable, kCsv, kPlot };

ReportFormat ReportFormatFromString(const std::string &s);

// Deterministic renderings of experiment records. The plot format draws the
// accuracy-versus-samples curves (one polyline per architecture) as SVG.
std::string RenderTable(const std::vector<ExperimentRecord> &records);
std::string RenderCsv(const std::vector<ExperimentRecord> &records);
std::string RenderSweepSvg(const std::vector<ExperimentRecord> &records);

// Few-shot grid in the usual layout: one row per architecture, columns
// 5-way 1/5-shot and 20-way 1/5-shot (or whatever grid the records span).
std::string RenderFewShotGrid(const std::vector<ExperimentRecord> &records);

// Dispatches on format and writes the file. Raises kEmptyInput on an empty
// record set.
void WriteReport(const std::vector<ExperimentRecord> &records,
                 ReportFormat format, const std::string &out_path);

}  // namespace harness
}  // namespace fssr

#endif  // FSSR_HARNESS_REPORT_H_
