#pragma once

// Report files. Metrics are percentages rounded to two decimals; ROC points
// are written raw. Unreachable BPCER@APCER operating points are null.

#include <string>
#include <vector>

#include "kgprompt/pipeline.hpp"

namespace kgprompt {

double round2(double v);

std::string cross_report_json(const EvaluationReport& r, const std::string& train_source,
                              const std::string& test_source);
std::string loocv_report_json(const LoocvReport& r, const std::string& source);

// Standalone SVG line plot of FAR (x) against 1 - FRR (y).
std::string roc_svg(const std::vector<RocPoint>& roc, const std::string& title);

// epoch,lr,srd,sce,total with a header row.
std::string loss_log_csv(const std::vector<EpochLog>& log);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace kgprompt
