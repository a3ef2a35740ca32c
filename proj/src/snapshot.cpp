#include "seco/snapshot.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace seco {

using nlohmann::json;

namespace {

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (const Vec& row : m) rows.push_back(row);
  return rows;
}

Mat mat_from_json(const json& j) {
  Mat m;
  for (const json& row : j) m.push_back(row.get<Vec>());
  return m;
}

}  // namespace

void save_snapshot(const std::string& path, const Snapshot& snapshot) {
  const EncoderParams& enc = snapshot.student.encoder;
  json bank_protos = json::array();
  json bank_init = json::array();
  for (int l = 1; l <= snapshot.bank.classes(); ++l) {
    bank_init.push_back(snapshot.bank.initialized(l));
    if (snapshot.bank.initialized(l))
      bank_protos.push_back(snapshot.bank.prototype(l));
    else
      bank_protos.push_back(nullptr);
  }

  const json j = {
      {"version", kSnapshotVersion},
      {"config", json::parse(config_to_json(snapshot.config))},
      {"student",
       {{"encoder",
         {{"input", enc.input_dim()},
          {"hidden", enc.hidden_dim()},
          {"embed", enc.embed_dim()},
          {"flat", enc.flatten()},
          {"center", enc.center}}},
        {"aux_head", mat_to_json(snapshot.student.aux_head)},
        {"cls_head", mat_to_json(snapshot.student.cls_head)},
        {"seg_head", mat_to_json(snapshot.student.seg_head)}}},
      {"teacher", {{"momentum", snapshot.teacher.momentum}, {"flat", snapshot.teacher.values}}},
      {"bank",
       {{"classes", snapshot.bank.classes()},
        {"dim", snapshot.bank.dim()},
        {"initialized", bank_init},
        {"prototypes", bank_protos}}}};

  std::ofstream out(path);
  if (!out) fail(Errc::invalid_config, "cannot write snapshot: " + path);
  out << j.dump(2) << "\n";
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::bad_snapshot, "cannot open snapshot: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();

  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::exception& e) {
    fail(Errc::bad_snapshot, std::string("snapshot is not valid JSON: ") + e.what());
  }

  try {
    if (!j.contains("version") || j.at("version").get<int>() != kSnapshotVersion)
      fail(Errc::bad_snapshot, "snapshot version mismatch");

    const Config config = config_from_json(j.at("config").dump());

    const json& enc = j.at("student").at("encoder");
    StudentState student;
    student.encoder = EncoderParams::from_flat(enc.at("flat").get<std::vector<double>>(),
                                               enc.at("input").get<int>(),
                                               enc.at("hidden").get<int>(),
                                               enc.at("embed").get<int>());
    student.encoder.center = enc.at("center").get<Vec>();
    student.aux_head = mat_from_json(j.at("student").at("aux_head"));
    student.cls_head = mat_from_json(j.at("student").at("cls_head"));
    student.seg_head = mat_from_json(j.at("student").at("seg_head"));

    EmaParams teacher;
    teacher.momentum = j.at("teacher").at("momentum").get<double>();
    teacher.values = j.at("teacher").at("flat").get<std::vector<double>>();

    PrototypeBank bank(j.at("bank").at("classes").get<int>(), j.at("bank").at("dim").get<int>());
    const json& init = j.at("bank").at("initialized");
    const json& protos = j.at("bank").at("prototypes");
    for (int l = 1; l <= bank.classes(); ++l)
      if (init.at(l - 1).get<bool>()) bank.set_prototype(l, protos.at(l - 1).get<Vec>());

    return Snapshot{config, std::move(student), std::move(teacher), std::move(bank)};
  } catch (const Error& e) {
    if (e.code() == Errc::bad_snapshot) throw;
    fail(Errc::bad_snapshot, std::string("snapshot fields malformed: ") + e.what());
  } catch (const std::exception& e) {
    fail(Errc::bad_snapshot, std::string("snapshot fields malformed: ") + e.what());
  }
}

}  // namespace seco
