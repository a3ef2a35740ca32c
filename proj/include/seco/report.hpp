#pragma once

#include <string>

#include "seco/trainer.hpp"

namespace seco {

/// JSONL: one header line, one line per evaluation/epoch record.
void write_report_jsonl(const std::string& path, const TrainReport& report);

std::string report_header_json(const TrainReport& report);
std::string epoch_record_json(const EpochRecord& record);
std::string evaluation_json(const Evaluation& eval);

void write_similarity_csv(const std::string& path, const Mat& matrix);

}  // namespace seco
