#include "iidgan/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "iidgan/error.hpp"

namespace iidgan {

using nlohmann::json;

namespace {

std::vector<double> doubles(const json& j, const char* what, std::size_t expected) {
  if (!j.is_array()) throw CheckpointError(std::string(what) + " must be an array");
  if (j.size() != expected)
    throw CheckpointError(std::string(what) + " has " + std::to_string(j.size()) +
                          " entries, expected " + std::to_string(expected));
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : j) {
    if (!v.is_number()) throw CheckpointError(std::string(what) + " contains a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

std::size_t count_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned())
    throw CheckpointError(std::string("missing or invalid '") + key + "'");
  return j.at(key).get<std::size_t>();
}

}  // namespace

json mlp_to_json(const Mlp& net) {
  json layers = json::array();
  for (const auto& l : net.layers()) {
    json jl;
    jl["rows"] = l.weight.rows();
    jl["cols"] = l.weight.cols();
    jl["weight"] = std::vector<double>(l.weight.values().begin(), l.weight.values().end());
    jl["bias"] = l.bias;
    jl["activation"] = activation_name(l.activation.kind);
    if (l.activation.kind == ActivationKind::LeakyReLU) jl["slope"] = l.activation.slope;
    layers.push_back(std::move(jl));
  }
  return json{{"layers", std::move(layers)}};
}

Mlp mlp_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("layers") || !doc.at("layers").is_array() ||
      doc.at("layers").empty())
    throw CheckpointError("network document needs a non-empty 'layers' array");
  std::vector<AffineLayer> layers;
  for (const auto& jl : doc.at("layers")) {
    if (!jl.is_object()) throw CheckpointError("layer entry must be an object");
    const std::size_t rows = count_field(jl, "rows");
    const std::size_t cols = count_field(jl, "cols");
    if (rows == 0 || cols == 0) throw CheckpointError("layer has a zero dimension");
    AffineLayer l;
    l.weight = Matrix(rows, cols, doubles(jl.value("weight", json()), "weight", rows * cols));
    l.bias = doubles(jl.value("bias", json()), "bias", rows);
    if (!jl.contains("activation") || !jl.at("activation").is_string())
      throw CheckpointError("layer needs an 'activation' string");
    try {
      l.activation.kind = parse_activation(jl.at("activation").get<std::string>());
    } catch (const DomainError& e) {
      throw CheckpointError(e.what());
    }
    l.activation.slope = l.activation.kind == ActivationKind::LeakyReLU ? jl.value("slope", 0.2) : 0.0;
    if (!l.weight.all_finite()) throw CheckpointError("non-finite weight");
    layers.push_back(std::move(l));
  }
  try {
    return Mlp(std::move(layers));
  } catch (const Error& e) {
    throw CheckpointError(e.what());
  }
}

json adam_to_json(const AdamState& state) {
  return json{{"step", state.step},
              {"learning_rate", state.params.learning_rate},
              {"beta1", state.params.beta1},
              {"beta2", state.params.beta2},
              {"epsilon", state.params.epsilon},
              {"first_moment", state.first_moment},
              {"second_moment", state.second_moment}};
}

AdamState adam_from_json(const json& doc, const Mlp& net) {
  if (!doc.is_object()) throw CheckpointError("optimizer document must be an object");
  AdamState reference(net, AdamParams{});
  AdamState s;
  try {
    s.step = doc.at("step").get<std::uint64_t>();
    s.params.learning_rate = doc.at("learning_rate").get<double>();
    s.params.beta1 = doc.at("beta1").get<double>();
    s.params.beta2 = doc.at("beta2").get<double>();
    s.params.epsilon = doc.at("epsilon").get<double>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("optimizer document: ") + e.what());
  }
  for (const char* key : {"first_moment", "second_moment"}) {
    const json& arr = doc.value(key, json());
    if (!arr.is_array() || arr.size() != reference.first_moment.size())
      throw CheckpointError(std::string("optimizer '") + key + "' does not match network");
    auto& dst = std::string_view(key) == "first_moment" ? s.first_moment : s.second_moment;
    for (std::size_t i = 0; i < arr.size(); ++i)
      dst.push_back(doubles(arr[i], key, reference.first_moment[i].size()));
  }
  return s;
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

void save_mlp(const std::filesystem::path& path, const Mlp& net) {
  write_json_file(path, mlp_to_json(net));
}

Mlp load_mlp(const std::filesystem::path& path) { return mlp_from_json(read_json_file(path)); }

}  // namespace iidgan
