#include "tabbench/space.hpp"

#include <charconv>
#include <limits>
#include <system_error>

#include "tabbench/error.hpp"

namespace tabbench {

std::string Value::to_string() const {
  if (!is_num_) return str_;
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), num_);
  return std::string(buf, res.ptr);
}

ConfigSpace::ConfigSpace(std::vector<Hyperparameter> params) : params_(std::move(params)) {
  if (params_.empty()) throw Error("config space needs at least one parameter");
  for (size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    if (p.name.empty()) throw Error("parameter " + std::to_string(i) + " has an empty name");
    for (size_t j = 0; j < i; ++j) {
      if (params_[j].name == p.name) throw Error("duplicate parameter name '" + p.name + "'");
    }
    if (p.values.empty()) throw Error("parameter '" + p.name + "' has no values");
    for (size_t a = 0; a < p.values.size(); ++a) {
      for (size_t b = 0; b < a; ++b) {
        if (p.values[a] == p.values[b])
          throw Error("parameter '" + p.name + "' has duplicate value " + p.values[a].to_string());
      }
    }
    if (p.kind == ParamKind::ordinal) {
      for (size_t a = 0; a < p.values.size(); ++a) {
        if (!p.values[a].is_number())
          throw Error("ordinal parameter '" + p.name + "' has non-numeric value");
        if (a > 0 && !(p.values[a - 1].num() < p.values[a].num()))
          throw Error("ordinal parameter '" + p.name + "' values must be strictly increasing");
      }
    }
    const uint64_t c = static_cast<uint64_t>(p.values.size());
    if (cardinality_ > std::numeric_limits<uint64_t>::max() / c)
      throw Error("config space cardinality overflows 64 bits");
    cardinality_ *= c;
  }
}

int ConfigSpace::param_index(const std::string& name) const {
  for (size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

uint64_t ConfigSpace::encode(std::span<const int> positions) const {
  if (positions.size() != params_.size())
    throw std::domain_error("expected " + std::to_string(params_.size()) + " positions, got " +
                            std::to_string(positions.size()));
  uint64_t index = 0;
  for (size_t i = 0; i < params_.size(); ++i) {
    const int c = params_[i].cardinality();
    if (positions[i] < 0 || positions[i] >= c)
      throw std::domain_error("position " + std::to_string(positions[i]) +
                              " out of range for parameter '" + params_[i].name + "' (cardinality " +
                              std::to_string(c) + ")");
    index = index * static_cast<uint64_t>(c) + static_cast<uint64_t>(positions[i]);
  }
  return index;
}

std::vector<int> ConfigSpace::decode(uint64_t index) const {
  if (index >= cardinality_)
    throw std::out_of_range("config index " + std::to_string(index) + " out of range (cardinality " +
                            std::to_string(cardinality_) + ")");
  std::vector<int> positions(params_.size());
  for (size_t i = params_.size(); i-- > 0;) {
    const uint64_t c = static_cast<uint64_t>(params_[i].cardinality());
    positions[i] = static_cast<int>(index % c);
    index /= c;
  }
  return positions;
}

std::vector<uint64_t> ConfigSpace::neighbors(uint64_t index) const {
  const std::vector<int> positions = decode(index);
  std::vector<uint64_t> out;
  out.reserve(num_neighbors());
  std::vector<int> probe = positions;
  for (size_t i = 0; i < params_.size(); ++i) {
    for (int v = 0; v < params_[i].cardinality(); ++v) {
      if (v == positions[i]) continue;
      probe[i] = v;
      out.push_back(encode(probe));
    }
    probe[i] = positions[i];
  }
  return out;
}

size_t ConfigSpace::num_neighbors() const {
  size_t n = 0;
  for (const auto& p : params_) n += static_cast<size_t>(p.cardinality() - 1);
  return n;
}

bool ConfigSpace::operator==(const ConfigSpace& o) const {
  if (params_.size() != o.params_.size()) return false;
  for (size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = o.params_[i];
    if (a.name != b.name || a.kind != b.kind || a.values.size() != b.values.size()) return false;
    for (size_t v = 0; v < a.values.size(); ++v) {
      if (!(a.values[v] == b.values[v])) return false;
    }
  }
  return true;
}

ConfigSpace fcnet_space() {
  auto ord = [](std::string name, std::initializer_list<double> vals) {
    Hyperparameter p;
    p.name = std::move(name);
    p.kind = ParamKind::ordinal;
    for (double v : vals) p.values.push_back(Value::number(v));
    return p;
  };
  auto cat = [](std::string name, std::initializer_list<const char*> vals) {
    Hyperparameter p;
    p.name = std::move(name);
    p.kind = ParamKind::categorical;
    for (const char* v : vals) p.values.push_back(Value::text(v));
    return p;
  };
  std::vector<Hyperparameter> params;
  params.push_back(ord("init_lr", {0.0005, 0.001, 0.005, 0.01, 0.05, 0.1}));
  params.push_back(ord("batch_size", {8, 16, 32, 64}));
  params.push_back(cat("lr_schedule", {"cosine", "const"}));
  params.push_back(cat("activation1", {"relu", "tanh"}));
  params.push_back(cat("activation2", {"relu", "tanh"}));
  params.push_back(ord("layer1_size", {16, 32, 64, 128, 256, 512}));
  params.push_back(ord("layer2_size", {16, 32, 64, 128, 256, 512}));
  params.push_back(ord("dropout1", {0.0, 0.3, 0.6}));
  params.push_back(ord("dropout2", {0.0, 0.3, 0.6}));
  return ConfigSpace(std::move(params));
}

}  // namespace tabbench
