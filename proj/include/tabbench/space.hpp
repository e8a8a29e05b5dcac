#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tabbench {

// A single grid value: either a number or a text label.
class Value {
 public:
  static Value number(double v) {
    Value x;
    x.is_num_ = true;
    x.num_ = v;
    return x;
  }
  static Value text(std::string s) {
    Value x;
    x.is_num_ = false;
    x.str_ = std::move(s);
    return x;
  }

  bool is_number() const { return is_num_; }
  double num() const { return num_; }
  const std::string& str() const { return str_; }

  bool operator==(const Value& o) const {
    if (is_num_ != o.is_num_) return false;
    return is_num_ ? num_ == o.num_ : str_ == o.str_;
  }

  // Numbers render as the shortest string that parses back to the same double.
  std::string to_string() const;

 private:
  bool is_num_ = true;
  double num_ = 0.0;
  std::string str_;
};

enum class ParamKind { ordinal, categorical };

struct Hyperparameter {
  std::string name;
  ParamKind kind = ParamKind::categorical;
  std::vector<Value> values;

  int cardinality() const { return static_cast<int>(values.size()); }
};

// Finite product grid over named hyperparameters. Config indices use a
// mixed-radix encoding with the first parameter most significant.
class ConfigSpace {
 public:
  explicit ConfigSpace(std::vector<Hyperparameter> params);

  int num_params() const { return static_cast<int>(params_.size()); }
  const Hyperparameter& param(int i) const { return params_[i]; }
  const std::vector<Hyperparameter>& params() const { return params_; }
  uint64_t cardinality() const { return cardinality_; }

  // -1 if no such name.
  int param_index(const std::string& name) const;

  uint64_t encode(std::span<const int> positions) const;
  std::vector<int> decode(uint64_t index) const;

  // All configs differing in exactly one position, ordered by parameter then
  // by the alternative position (ascending, skipping the current one).
  std::vector<uint64_t> neighbors(uint64_t index) const;
  size_t num_neighbors() const;

  bool operator==(const ConfigSpace& o) const;

 private:
  std::vector<Hyperparameter> params_;
  uint64_t cardinality_ = 1;
};

// The built-in two-hidden-layer regression network grid: learning rate,
// batch size, LR schedule, two activations, two layer widths, two dropout
// rates. 62,208 configurations.
ConfigSpace fcnet_space();

}  // namespace tabbench
