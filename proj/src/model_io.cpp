#include "hyperalign/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hyperalign/error.hpp"

namespace hyperalign {

namespace {

constexpr const char* kFormatName = "hyperalign-model";

std::string num(double v) {
  if (std::isnan(v)) return "null";
  // "-0" would parse back as the integer 0.
  if (v == 0.0 && std::signbit(v)) return "-0.0";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

FormatError schema_error(const std::string& what) { return FormatError("model: " + what, 0); }

}  // namespace

std::string serialize_model(const Model& model) {
  model.params.validate();
  const ParameterSet& p = model.params;
  std::ostringstream out;
  out << "{\n";
  out << "  \"format\": \"" << kFormatName << "\",\n";
  out << "  \"version\": " << kModelFormatVersion << ",\n";
  out << "  \"geometry\": {\"curvature\": " << num(model.manifold.curvature)
      << ", \"manifold_eps\": " << num(model.manifold.eps) << ", \"k\": " << num(model.entailment.k)
      << ", \"contraction\": " << num(model.entailment.contraction)
      << ", \"entailment_eps\": " << num(model.entailment.eps)
      << ", \"alpha_max\": " << num(p.image_scaler.alpha_max) << "},\n";
  out << "  \"dim\": " << p.dim() << ",\n";
  out << "  \"adapter_hidden\": " << p.image_adapter.hidden << ",\n";
  out << "  \"modnet_hidden\": " << p.modnet.hidden << ",\n";
  out << "  \"parameters\": [\n";
  const auto tensors = p.tensors();
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    const auto& ref = tensors[t];
    out << "    {\"name\": \"" << ref.name << "\", \"shape\": [";
    for (std::size_t s = 0; s < ref.shape.size(); ++s) out << (s ? ", " : "") << ref.shape[s];
    out << "], \"values\": [";
    for (std::size_t i = 0; i < ref.values.size(); ++i) out << (i ? ", " : "") << num(ref.values[i]);
    out << "]}" << (t + 1 < tensors.size() ? "," : "") << "\n";
  }
  out << "  ],\n";
  out << "  \"training\": {\"seed\": " << model.training.seed
      << ", \"epochs_run\": " << model.training.epochs_run
      << ", \"best_epoch\": " << model.training.best_epoch
      << ", \"best_val_srcc\": " << num(model.training.best_val_srcc) << "}\n";
  out << "}\n";
  return out.str();
}

Model deserialize_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("model: invalid JSON: ") + e.what(), e.byte);
  }
  try {
    if (doc.at("format").get<std::string>() != kFormatName) throw schema_error("unknown format");
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw schema_error("unsupported version");
    }
    Model m;
    const auto& geo = doc.at("geometry");
    m.manifold.curvature = geo.at("curvature").get<double>();
    m.manifold.eps = geo.at("manifold_eps").get<double>();
    m.entailment.k = geo.at("k").get<double>();
    m.entailment.contraction = geo.at("contraction").get<double>();
    m.entailment.eps = geo.at("entailment_eps").get<double>();
    const double alpha_max = geo.at("alpha_max").get<double>();
    m.manifold.validate();
    m.entailment.validate();

    const auto dim = doc.at("dim").get<std::size_t>();
    const auto adapter_hidden = doc.at("adapter_hidden").get<std::size_t>();
    const auto modnet_hidden = doc.at("modnet_hidden").get<std::size_t>();
    if (dim == 0 || adapter_hidden != AdapterParams::hidden_for(dim) || modnet_hidden == 0) {
      throw schema_error("inconsistent dimensions");
    }
    m.params.image_adapter = AdapterParams::zeros(dim);
    m.params.text_adapter = AdapterParams::zeros(dim);
    m.params.modnet = ModulationNetParams::zeros(modnet_hidden);
    m.params.image_scaler.alpha_max = alpha_max;
    m.params.text_scaler.alpha_max = alpha_max;

    const auto& arr = doc.at("parameters");
    auto tensors = m.params.tensors();
    if (!arr.is_array() || arr.size() != tensors.size()) {
      throw schema_error("expected " + std::to_string(tensors.size()) + " parameter tensors");
    }
    for (std::size_t t = 0; t < tensors.size(); ++t) {
      const auto& entry = arr[t];
      if (entry.at("name").get<std::string>() != tensors[t].name) {
        throw schema_error("tensor " + std::to_string(t) + " should be " + tensors[t].name);
      }
      if (entry.at("shape").get<std::vector<std::size_t>>() != tensors[t].shape) {
        throw schema_error("shape mismatch for " + tensors[t].name);
      }
      const auto& values = entry.at("values");
      if (values.size() != tensors[t].values.size()) {
        throw schema_error("value count mismatch for " + tensors[t].name);
      }
      for (std::size_t i = 0; i < values.size(); ++i) tensors[t].values[i] = values[i].get<double>();
    }

    const auto& tr = doc.at("training");
    m.training.seed = tr.at("seed").get<std::uint64_t>();
    m.training.epochs_run = tr.at("epochs_run").get<int>();
    m.training.best_epoch = tr.at("best_epoch").get<int>();
    m.training.best_val_srcc =
        tr.at("best_val_srcc").is_null() ? std::nan("") : tr.at("best_val_srcc").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw schema_error(e.what());
  } catch (const InvalidInput& e) {
    throw schema_error(e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << serialize_model(model);
  if (!out) throw Error("failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace hyperalign
