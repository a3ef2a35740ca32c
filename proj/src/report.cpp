#include "seco/report.hpp"

#include <fstream>

#include "json.hpp"

namespace seco {

using nlohmann::json;

namespace {

json optional_to_json(const std::optional<double>& value) {
  if (value) return *value;
  return nullptr;
}

json route_to_json(const RouteEval& route) {
  json rows = json::array();
  for (const EvalClassRow& row : route.per_class)
    rows.push_back({{"label", row.label},
                    {"iou", optional_to_json(row.iou)},
                    {"precision", optional_to_json(row.precision)},
                    {"recall", optional_to_json(row.recall)},
                    {"confusion_ratio", optional_to_json(row.confusion)}});
  return {{"miou", route.miou}, {"per_class", rows}};
}

json eval_to_json(const Evaluation& eval) {
  json j = {{"seg", route_to_json(eval.seg)}};
  j["proto"] = eval.proto ? route_to_json(*eval.proto) : json(nullptr);
  return j;
}

json record_to_json(const EpochRecord& record) {
  json occupancy = json::object();
  for (const auto& [tag, count] : record.reservoir_occupancy)
    occupancy[std::to_string(tag)] = count;
  return {{"type", "epoch"},
          {"epoch", record.epoch},
          {"losses",
           {{"cls", record.stats.cls},
            {"cls_aux", record.stats.cls_aux},
            {"lig", record.stats.lig},
            {"lil", record.stats.lil},
            {"seg", record.stats.seg},
            {"total", record.stats.total}}},
          {"tags",
           {{"background", record.stats.tags_background},
            {"class", record.stats.tags_class},
            {"uncertain", record.stats.tags_uncertain}}},
          {"rectified", record.stats.rectified},
          {"reservoir", {{"size", record.reservoir_size}, {"occupancy", occupancy}}},
          {"prototypes",
           {{"initialized", record.prototypes_initialized},
            {"max_offdiag", optional_to_json(record.prototype_max_offdiag)}}},
          {"eval", eval_to_json(record.eval)}};
}

}  // namespace

std::string report_header_json(const TrainReport& report) {
  const json j = {{"type", "header"},
                  {"version", 1},
                  {"flags",
                   {{"disable_lig", report.flags.disable_lig},
                    {"disable_lil", report.flags.disable_lil},
                    {"disable_rectify", report.flags.disable_rectify}}},
                  {"config", json::parse(config_to_json(report.config))}};
  return j.dump();
}

std::string epoch_record_json(const EpochRecord& record) { return record_to_json(record).dump(); }

std::string evaluation_json(const Evaluation& eval) { return eval_to_json(eval).dump(); }

void write_report_jsonl(const std::string& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) fail(Errc::invalid_config, "cannot write report: " + path);
  out << report_header_json(report) << "\n";
  const json initial = {{"type", "epoch"}, {"epoch", 0}, {"eval", eval_to_json(report.initial_eval)}};
  out << initial.dump() << "\n";
  for (const EpochRecord& record : report.records) out << epoch_record_json(record) << "\n";
}

void write_similarity_csv(const std::string& path, const Mat& matrix) {
  std::ofstream out(path);
  if (!out) fail(Errc::invalid_config, "cannot write csv: " + path);
  out << "class";
  for (std::size_t j = 0; j < matrix.size(); ++j) out << "," << (j + 1);
  out << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out << (i + 1);
    for (std::size_t j = 0; j < matrix[i].size(); ++j) out << "," << matrix[i][j];
    out << "\n";
  }
}

}  // namespace seco
