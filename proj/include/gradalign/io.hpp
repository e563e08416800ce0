#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gradalign/dataset.hpp"
#include "gradalign/model.hpp"

namespace gradalign {

using json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingInputError : IoError {
  using IoError::IoError;
};

// Malformed content in an existing file.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(1) + "\n"); }

inline json model_to_json(const Model& m) {
  json layers = json::array();
  for (const auto& l : m.layers()) {
    layers.push_back({{"rows", l.rows},
                      {"cols", l.cols},
                      {"weights", l.weights},
                      {"bias", l.bias},
                      {"activation", std::string(to_string(l.activation))}});
  }
  return {{"input_dim", m.input_dim()}, {"num_classes", m.num_classes()}, {"layers", std::move(layers)}};
}

inline Model model_from_json(const json& j) {
  try {
    std::vector<DenseLayer> layers;
    for (const auto& jl : j.at("layers")) {
      DenseLayer l;
      l.rows = jl.at("rows").get<std::size_t>();
      l.cols = jl.at("cols").get<std::size_t>();
      l.weights = jl.at("weights").get<std::vector<double>>();
      l.bias = jl.at("bias").get<std::vector<double>>();
      l.activation = activation_from_string(jl.at("activation").get<std::string>());
      layers.push_back(std::move(l));
    }
    Model m(std::move(layers));
    if (m.input_dim() != j.at("input_dim").get<std::size_t>() || m.num_classes() != j.at("num_classes").get<std::size_t>())
      throw FormatError("model header disagrees with its layers");
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

inline json dataset_to_json(const Dataset& d) {
  json ex = json::array();
  for (const auto& e : d.examples) ex.push_back({{"x", e.x.values()}, {"y", e.y}});
  return {{"d", d.input_dim}, {"C", d.num_classes}, {"examples", std::move(ex)}};
}

inline Dataset dataset_from_json(const json& j) {
  try {
    Dataset d;
    d.input_dim = j.at("d").get<std::size_t>();
    d.num_classes = j.at("C").get<std::size_t>();
    for (const auto& je : j.at("examples"))
      d.examples.push_back({Tensor(je.at("x").get<std::vector<double>>()), je.at("y").get<std::size_t>()});
    d.validate();
    return d;
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("dataset: ") + e.what());
  }
}

inline Model load_model(const std::filesystem::path& p) { return model_from_json(read_json_file(p)); }
inline Dataset load_dataset(const std::filesystem::path& p) { return dataset_from_json(read_json_file(p)); }
inline void save_model(const std::filesystem::path& p, const Model& m) { write_json_file(p, model_to_json(m)); }
inline void save_dataset(const std::filesystem::path& p, const Dataset& d) { write_json_file(p, dataset_to_json(d)); }

}  // namespace gradalign
