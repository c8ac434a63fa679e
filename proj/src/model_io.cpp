// Copyright 2026 The dpmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpmix/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dpmix/errors.hpp"

namespace dpmix {

namespace {

using nlohmann::json;

std::vector<double> number_array(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) {
    throw ParseError("expected nonempty number array at " + path);
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw ParseError("expected number at " + path + "[" +
                       std::to_string(out.size()) + "]");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

const json& field(const json& j, const char* name, const std::string& path) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw ParseError("missing field " + path + "." + name);
  }
  return *it;
}

Component component_from_json(const json& j, const std::string& path);

Model model_from_json_at(const json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ParseError("expected object at " + path);
  }
  const std::string type = field(j, "type", path).get<std::string>();
  if (type == "gaussian") {
    const auto mus = number_array(field(j, "mus", path), path + ".mus");
    const auto sigmas = number_array(field(j, "sigmas", path), path + ".sigmas");
    if (mus.size() != sigmas.size()) {
      throw ParseError("mus/sigmas length mismatch at " + path);
    }
    Model m = mus.size() == 1 ? Model{Gaussian1D{mus[0], sigmas[0]}}
                              : Model{AxisAlignedGaussian{mus, sigmas}};
    validate(m);
    return m;
  }
  if (type == "point") {
    Model m{PointMass{number_array(field(j, "mus", path), path + ".mus")}};
    validate(m);
    return m;
  }
  if (type == "mixture") {
    Mixture mix;
    mix.weights = number_array(field(j, "weights", path), path + ".weights");
    if (j.contains("components")) {
      const auto& comps = j.at("components");
      if (!comps.is_array()) {
        throw ParseError("expected array at " + path + ".components");
      }
      for (std::size_t i = 0; i < comps.size(); ++i) {
        mix.components.push_back(component_from_json(
            comps[i], path + ".components[" + std::to_string(i) + "]"));
      }
    } else {
      const auto& mus = field(j, "mus", path);
      const auto& sigmas = field(j, "sigmas", path);
      if (!mus.is_array() || !sigmas.is_array() ||
          mus.size() != sigmas.size() || mus.size() != mix.weights.size()) {
        throw ParseError("mixture mus/sigmas/weights shape mismatch at " +
                         path);
      }
      for (std::size_t i = 0; i < mus.size(); ++i) {
        const std::string mp = path + ".mus[" + std::to_string(i) + "]";
        const std::string sp = path + ".sigmas[" + std::to_string(i) + "]";
        if (mus[i].is_number() && sigmas[i].is_number()) {
          mix.components.push_back(
              Gaussian1D{mus[i].get<double>(), sigmas[i].get<double>()});
        } else {
          const auto mv = number_array(mus[i], mp);
          const auto sv = number_array(sigmas[i], sp);
          if (mv.size() != sv.size()) {
            throw ParseError("component shape mismatch at " + mp);
          }
          if (mv.size() == 1) {
            mix.components.push_back(Gaussian1D{mv[0], sv[0]});
          } else {
            mix.components.push_back(AxisAlignedGaussian{mv, sv});
          }
        }
      }
    }
    Model m{mix};
    validate(m);
    return m;
  }
  throw ParseError("unknown model type '" + type + "' at " + path + ".type");
}

Component component_from_json(const json& j, const std::string& path) {
  const Model m = model_from_json_at(j, path);
  if (const auto* g = std::get_if<Gaussian1D>(&m)) return *g;
  if (const auto* a = std::get_if<AxisAlignedGaussian>(&m)) return *a;
  if (const auto* p = std::get_if<PointMass>(&m)) return *p;
  throw ParseError("nested mixtures are not supported at " + path);
}

json component_to_json(const Component& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          return {{"type", "gaussian"},
                  {"mus", {v.mu}},
                  {"sigmas", {v.sigma}}};
        } else if constexpr (std::is_same_v<T, AxisAlignedGaussian>) {
          return {{"type", "gaussian"}, {"mus", v.mu}, {"sigmas", v.sigma}};
        } else {
          return {{"type", "point"}, {"mus", v.location}};
        }
      },
      c);
}

}  // namespace

json model_to_json(const Model& model) {
  if (const auto* mix = std::get_if<Mixture>(&model)) {
    const bool all_gaussian =
        std::all_of(mix->components.begin(), mix->components.end(),
                    [](const Component& c) {
                      return !std::holds_alternative<PointMass>(c);
                    });
    json j{{"type", "mixture"}, {"weights", mix->weights}};
    if (all_gaussian) {
      json mus = json::array(), sigmas = json::array();
      for (const auto& c : mix->components) {
        const json cj = component_to_json(c);
        mus.push_back(cj.at("mus"));
        sigmas.push_back(cj.at("sigmas"));
      }
      j["mus"] = mus;
      j["sigmas"] = sigmas;
    } else {
      json comps = json::array();
      for (const auto& c : mix->components) comps.push_back(component_to_json(c));
      j["components"] = comps;
    }
    return j;
  }
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Mixture>) {
          return json{};  // unreachable
        } else {
          return component_to_json(Component{v});
        }
      },
      model);
}

json source_to_json(const CorruptedSource& source) {
  return {{"type", "corrupted"},
          {"gamma", source.gamma},
          {"target", model_to_json(source.target)},
          {"contaminant", model_to_json(source.contaminant)}};
}

Model model_from_json(const json& j) { return model_from_json_at(j, "$"); }

CorruptedSource source_from_json(const json& j) {
  if (j.is_object() && j.contains("type") &&
      j.at("type").get<std::string>() == "corrupted") {
    CorruptedSource src;
    if (!j.contains("gamma") || !j.at("gamma").is_number()) {
      throw ParseError("missing numeric field $.gamma");
    }
    src.gamma = j.at("gamma").get<double>();
    src.target = model_from_json_at(field(j, "target", "$"), "$.target");
    src.contaminant =
        model_from_json_at(field(j, "contaminant", "$"), "$.contaminant");
    validate(src);
    return src;
  }
  CorruptedSource src;
  src.target = model_from_json(j);
  src.gamma = 0.0;
  src.contaminant = src.target;
  return src;
}

Model read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
  return model_from_json(j);
}

CorruptedSource read_source_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
  return source_from_json(j);
}

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open dataset: " + path);
  Dataset ds;
  ds.dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<double> row;
    std::size_t pos = 0;
    bool numeric = true;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      std::string cell = line.substr(pos, comma - pos);
      // Trim surrounding whitespace.
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cell = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
      double v = 0.0;
      const auto res =
          std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    if (!numeric) {
      if (lineno == 1) continue;  // header row
      throw ParseError("non-numeric cell at " + path + ":" +
                       std::to_string(lineno));
    }
    if (ds.dim == 0) ds.dim = row.size();
    if (row.size() != ds.dim) {
      throw InvalidInputError("ragged row at " + path + ":" +
                              std::to_string(lineno));
    }
    ds.values.insert(ds.values.end(), row.begin(), row.end());
  }
  if (ds.dim == 0) throw InvalidInputError("empty dataset: " + path);
  return ds;
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  out.reserve(data.values.size() * 20);
  char buf[64];
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.dim; ++j) {
      if (j > 0) out.push_back(',');
      const int len = std::snprintf(buf, sizeof buf, "%.17g",
                                    data.values[i * data.dim + j]);
      out.append(buf, static_cast<std::size_t>(len));
    }
    out.push_back('\n');
  }
  return out;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path() && !target.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInputError("cannot write: " + tmp.string());
    out << contents;
    if (!out.good()) throw InvalidInputError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InvalidInputError("atomic rename failed for " + path + ": " +
                            ec.message());
  }
}

}  // namespace dpmix
