#include "hsgp/checkpoint.hpp"

#include <fstream>

#include "hsgp/errors.hpp"
#include "json.hpp"

namespace hsgp {

using nlohmann::json;

namespace {

json to_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void from_rows(const json& rows, Matrix& m, const std::string& name) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != m.rows()) {
    throw Error(ErrorCode::DataError, "checkpoint tensor " + name + " has the wrong row count");
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
      throw Error(ErrorCode::DataError, "checkpoint tensor " + name + " has the wrong column count");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const ModelParams& p = checkpoint.params;
  const ModelDims dims = p.dims();
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["task"] = {{"kind", to_string(p.task.kind)}, {"num_classes", p.task.num_classes}};
  doc["dims"] = {{"feature_width", dims.feature_width},
                 {"hidden", dims.hidden},
                 {"head_hidden", dims.head_hidden},
                 {"layers", dims.layers}};
  doc["seed"] = checkpoint.seed;
  json order = json::array();
  json values = json::object();
  for (const auto& [name, m] : p.tensors()) {
    order.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
    values[name] = to_rows(*m);
  }
  doc["parameter_order"] = std::move(order);
  doc["parameters"] = std::move(values);

  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    if (doc.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw Error(ErrorCode::DataError, "unsupported checkpoint format version");
    }
    TaskSpec task;
    task.kind = parse_task(doc.at("task").at("kind").get<std::string>());
    task.num_classes = doc.at("task").at("num_classes").get<std::size_t>();
    ModelDims dims;
    dims.feature_width = doc.at("dims").at("feature_width").get<Eigen::Index>();
    dims.hidden = doc.at("dims").at("hidden").get<Eigen::Index>();
    dims.head_hidden = doc.at("dims").at("head_hidden").get<Eigen::Index>();
    dims.layers = doc.at("dims").at("layers").get<std::size_t>();

    Checkpoint ck;
    ck.seed = doc.at("seed").get<std::uint64_t>();
    ck.params = ModelParams::zeros(dims, task);
    const json& order = doc.at("parameter_order");
    const auto tensors = ck.params.tensors();
    if (order.size() != tensors.size()) throw Error(ErrorCode::DataError, "checkpoint tensor list mismatch");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const auto& [name, m] = tensors[i];
      if (order[i].at("name").get<std::string>() != name) {
        throw Error(ErrorCode::DataError, "checkpoint parameter order differs at " + name);
      }
      from_rows(doc.at("parameters").at(name), *m, name);
    }
    ck.params.validate();
    return ck;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace hsgp
