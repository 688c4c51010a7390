#include "covplan/cli/model_io.hpp"

#include "covplan/cli/csv.hpp"
#include "covplan/error.hpp"

#include <fstream>
#include <map>

namespace covplan::cli {

void write_model(std::ostream& out, const CompositeModel& model) {
  CsvTable table;
  table.header = {"name", "center", "weight"};
  const auto p = model.covariate_names.size();
  for (std::size_t j = 0; j < p; ++j) {
    table.rows.push_back({model.covariate_names[j], format_number(model.center(j)), format_number(model.weights(j))});
  }
  table.rows.push_back({"__lambda__", format_number(model.lambda), ""});
  table.rows.push_back({"__m__", std::to_string(model.m), ""});
  table.rows.push_back({"__nu_w__", format_number(model.trained_nu_w), ""});
  for (std::size_t j = 0; j < p; ++j) {
    table.rows.push_back({"__scale__", model.covariate_names[j], format_number(model.scale(j))});
  }
  write_csv(out, table);
}

CompositeModel read_model(std::istream& in) {
  const CsvTable table = read_csv(in);
  if (table.header != std::vector<std::string>{"name", "center", "weight"}) {
    fail(ErrorKind::InvalidData, "model file must have header name,center,weight");
  }
  CompositeModel model;
  std::vector<double> center, weight;
  std::map<std::string, double> scales;
  bool have_lambda = false;
  bool have_m = false;
  for (const auto& row : table.rows) {
    const std::string& key = row[0];
    if (key == "__lambda__") {
      model.lambda = parse_number(row[1], "model lambda");
      have_lambda = true;
    } else if (key == "__m__") {
      model.m = static_cast<int>(parse_number(row[1], "model m"));
      have_m = true;
    } else if (key == "__nu_w__") {
      model.trained_nu_w = parse_number(row[1], "model nu_w");
    } else if (key == "__scale__") {
      scales[row[1]] = parse_number(row[2], "scale of '" + row[1] + "'");
    } else if (key.starts_with("__")) {
      fail(ErrorKind::InvalidData, "unknown model metadata row '" + key + "'");
    } else {
      model.covariate_names.push_back(key);
      center.push_back(parse_number(row[1], "center of '" + key + "'"));
      weight.push_back(parse_number(row[2], "weight of '" + key + "'"));
    }
  }
  if (!have_lambda || !have_m) fail(ErrorKind::InvalidData, "model file lacks __lambda__ or __m__ rows");
  const auto p = model.covariate_names.size();
  model.center = Eigen::Map<const VectorXd>(center.data(), p);
  model.weights = Eigen::Map<const VectorXd>(weight.data(), p);
  model.scale = VectorXd::Ones(p);
  for (std::size_t j = 0; j < p; ++j) {
    auto it = scales.find(model.covariate_names[j]);
    if (it != scales.end()) model.scale(j) = it->second;
  }
  if (!model.center.allFinite() || !model.weights.allFinite()) fail(ErrorKind::InvalidData, "model has non-finite values");
  return model;
}

void write_model_file(const std::string& path, const CompositeModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidData, "cannot write '" + path + "'");
  write_model(out, model);
}

CompositeModel read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::InvalidData, "cannot open '" + path + "'");
  return read_model(in);
}

}  // namespace covplan::cli
