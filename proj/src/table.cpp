#include "tabbench/table.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>

#include "json.hpp"
#include "table_json.hpp"
#include "tabbench/error.hpp"

namespace tabbench {

using nlohmann::json;

Metric metric_from_name(const std::string& name) {
  if (name == "train") return Metric::train;
  if (name == "valid") return Metric::valid;
  if (name == "test") return Metric::test;
  if (name == "runtime") return Metric::runtime;
  if (name == "n_params") return Metric::n_params;
  throw std::domain_error("unknown metric '" + name +
                          "' (expected train, valid, test, runtime or n_params)");
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::train: return "train";
    case Metric::valid: return "valid";
    case Metric::test: return "test";
    case Metric::runtime: return "runtime";
    case Metric::n_params: return "n_params";
  }
  return "?";
}

BenchTable::BenchTable(ConfigSpace space, int max_epochs, std::string dataset_name,
                       std::vector<EvalEntry> entries)
    : space_(std::move(space)),
      max_epochs_(max_epochs),
      dataset_name_(std::move(dataset_name)),
      entries_(std::move(entries)) {
  if (max_epochs_ < 1) throw IntegrityError("max_epochs must be at least 1");
  if (entries_.size() != space_.cardinality())
    throw IntegrityError("table has " + std::to_string(entries_.size()) + " entries but the space has " +
                         std::to_string(space_.cardinality()) + " configurations");
  mean_test_cache_.resize(entries_.size());
  for (uint64_t c = 0; c < entries_.size(); ++c) {
    const auto& records = entries_[c].records;
    double sum = 0.0;
    for (const auto& rec : records) sum += rec.final_test_mse;
    mean_test_cache_[c] = sum / static_cast<double>(records.size());
  }
}

const EvalEntry& BenchTable::entry(uint64_t config) const {
  check_config(config);
  return entries_[config];
}

void BenchTable::check_config(uint64_t config) const {
  if (config >= entries_.size())
    throw std::out_of_range("config index " + std::to_string(config) + " out of range (cardinality " +
                            std::to_string(entries_.size()) + ")");
}

QueryResult BenchTable::query(uint64_t config, int budget_epochs, Rng& rng) const {
  check_config(config);
  if (budget_epochs < 1 || budget_epochs > max_epochs_)
    throw std::out_of_range("budget " + std::to_string(budget_epochs) + " out of range [1, " +
                            std::to_string(max_epochs_) + "]");
  const auto& records = entries_[config].records;
  const auto& rec = records[rng.below(records.size())];
  QueryResult out;
  out.valid_mse = rec.valid_curve[static_cast<size_t>(budget_epochs - 1)];
  out.runtime_charged_seconds = charged_seconds(rec.runtime_seconds, budget_epochs, max_epochs_);
  out.seed_drawn = rec.seed;
  out.budget_epochs = budget_epochs;
  return out;
}

double BenchTable::mean_metric(uint64_t config, Metric m, int budget_epochs) const {
  check_config(config);
  if (budget_epochs <= 0) budget_epochs = max_epochs_;
  if (budget_epochs > max_epochs_)
    throw std::out_of_range("budget " + std::to_string(budget_epochs) + " out of range [1, " +
                            std::to_string(max_epochs_) + "]");
  const auto& records = entries_[config].records;
  double sum = 0.0;
  for (const auto& rec : records) {
    switch (m) {
      case Metric::train: sum += rec.train_curve[static_cast<size_t>(budget_epochs - 1)]; break;
      case Metric::valid: sum += rec.valid_curve[static_cast<size_t>(budget_epochs - 1)]; break;
      case Metric::test: sum += rec.final_test_mse; break;
      case Metric::runtime: sum += charged_seconds(rec.runtime_seconds, budget_epochs, max_epochs_); break;
      case Metric::n_params: sum += static_cast<double>(rec.n_params); break;
    }
  }
  return sum / static_cast<double>(records.size());
}

const std::vector<double>& BenchTable::mean_test_all() const { return mean_test_cache_; }

std::pair<uint64_t, double> BenchTable::global_optimum() const {
  const auto& means = mean_test_all();
  uint64_t best = 0;
  for (uint64_t c = 1; c < means.size(); ++c) {
    if (means[c] < means[best]) best = c;
  }
  return {best, means[best]};
}

void BenchTable::validate() const {
  if (entries_.empty()) throw IntegrityError("table has no entries");
  const size_t n_seeds = entries_[0].records.size();
  if (n_seeds == 0) throw IntegrityError("config 0 has no seed records");
  for (uint64_t c = 0; c < entries_.size(); ++c) {
    const auto& records = entries_[c].records;
    const std::string where = "config " + std::to_string(c);
    if (records.size() != n_seeds)
      throw IntegrityError(where + " has " + std::to_string(records.size()) + " records, expected " +
                           std::to_string(n_seeds));
    for (size_t r = 0; r < records.size(); ++r) {
      const auto& rec = records[r];
      const std::string at = where + ", record " + std::to_string(r);
      if (rec.train_curve.size() != static_cast<size_t>(max_epochs_) ||
          rec.valid_curve.size() != static_cast<size_t>(max_epochs_))
        throw IntegrityError(at + ": curve length does not match max_epochs " +
                             std::to_string(max_epochs_));
      for (double v : rec.train_curve) {
        if (!std::isfinite(v) || v < 0.0) throw IntegrityError(at + ": bad train curve value");
      }
      for (double v : rec.valid_curve) {
        if (!std::isfinite(v) || v < 0.0) throw IntegrityError(at + ": bad valid curve value");
      }
      if (!std::isfinite(rec.final_test_mse) || rec.final_test_mse < 0.0)
        throw IntegrityError(at + ": bad final_test_mse");
      if (!std::isfinite(rec.runtime_seconds) || rec.runtime_seconds <= 0.0)
        throw IntegrityError(at + ": runtime_seconds must be positive");
      if (rec.n_params <= 0) throw IntegrityError(at + ": n_params must be positive");
      if (rec.n_params != records[0].n_params)
        throw IntegrityError(at + ": n_params differs between records of the same config");
    }
  }
}

namespace {

void feed(uint64_t& h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

void feed_u64(uint64_t& h, uint64_t v) { feed(h, &v, sizeof v); }

void feed_double(uint64_t& h, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  feed_u64(h, bits);
}

void feed_str(uint64_t& h, const std::string& s) {
  feed_u64(h, s.size());
  feed(h, s.data(), s.size());
}

json header_json(const BenchTable& t) {
  return json{{"format_version", 1},
              {"dataset_name", t.dataset_name()},
              {"max_epochs", t.max_epochs()},
              {"n_seeds", t.n_seeds()},
              {"space", detail::space_to_json(t.space())}};
}

}  // namespace

namespace detail {

json space_to_json(const ConfigSpace& space) {
  json out = json::array();
  for (const auto& p : space.params()) {
    json values = json::array();
    for (const auto& v : p.values) {
      if (v.is_number()) {
        values.push_back(v.num());
      } else {
        values.push_back(v.str());
      }
    }
    out.push_back({{"name", p.name},
                   {"kind", p.kind == ParamKind::ordinal ? "ordinal" : "categorical"},
                   {"values", values}});
  }
  return out;
}

ConfigSpace space_from_json(const json& j) {
  std::vector<Hyperparameter> params;
  for (const auto& pj : j) {
    Hyperparameter p;
    p.name = pj.at("name").get<std::string>();
    const std::string kind = pj.at("kind").get<std::string>();
    if (kind == "ordinal") {
      p.kind = ParamKind::ordinal;
    } else if (kind == "categorical") {
      p.kind = ParamKind::categorical;
    } else {
      throw ParseError("unknown parameter kind '" + kind + "'");
    }
    for (const auto& vj : pj.at("values")) {
      if (vj.is_number()) {
        p.values.push_back(Value::number(vj.get<double>()));
      } else if (vj.is_string()) {
        p.values.push_back(Value::text(vj.get<std::string>()));
      } else {
        throw ParseError("space value must be a number or a string");
      }
    }
    params.push_back(std::move(p));
  }
  return ConfigSpace(std::move(params));
}

json record_to_json(const SeedRecord& rec) {
  json j{{"seed", rec.seed},
         {"train_curve", rec.train_curve},
         {"valid_curve", rec.valid_curve},
         {"final_test_mse", rec.final_test_mse},
         {"runtime_seconds", rec.runtime_seconds},
         {"n_params", rec.n_params}};
  if (rec.diverged) j["diverged"] = true;
  return j;
}

SeedRecord record_from_json(const json& j) {
  SeedRecord rec;
  rec.seed = j.at("seed").get<int64_t>();
  rec.train_curve = j.at("train_curve").get<std::vector<double>>();
  rec.valid_curve = j.at("valid_curve").get<std::vector<double>>();
  rec.final_test_mse = j.at("final_test_mse").get<double>();
  rec.runtime_seconds = j.at("runtime_seconds").get<double>();
  rec.n_params = j.at("n_params").get<int64_t>();
  rec.diverged = j.value("diverged", false);
  return rec;
}

json entry_to_json(const EvalEntry& e) {
  json j;
  j["records"] = json::array();
  for (const auto& rec : e.records) j["records"].push_back(record_to_json(rec));
  return j;
}

EvalEntry entry_from_json(const json& j) {
  EvalEntry e;
  for (const auto& rj : j.at("records")) e.records.push_back(record_from_json(rj));
  return e;
}

}  // namespace detail

uint64_t BenchTable::checksum() const {
  uint64_t h = 14695981039346656037ULL;
  feed_str(h, dataset_name_);
  feed_u64(h, static_cast<uint64_t>(max_epochs_));
  feed_u64(h, static_cast<uint64_t>(space_.num_params()));
  for (const auto& p : space_.params()) {
    feed_str(h, p.name);
    feed_u64(h, p.kind == ParamKind::ordinal ? 1 : 2);
    feed_u64(h, static_cast<uint64_t>(p.values.size()));
    for (const auto& v : p.values) {
      if (v.is_number()) {
        feed_u64(h, 1);
        feed_double(h, v.num());
      } else {
        feed_u64(h, 2);
        feed_str(h, v.str());
      }
    }
  }
  for (const auto& e : entries_) {
    feed_u64(h, static_cast<uint64_t>(e.records.size()));
    for (const auto& rec : e.records) {
      feed_u64(h, static_cast<uint64_t>(rec.seed));
      for (double v : rec.train_curve) feed_double(h, v);
      for (double v : rec.valid_curve) feed_double(h, v);
      feed_double(h, rec.final_test_mse);
      feed_double(h, rec.runtime_seconds);
      feed_u64(h, static_cast<uint64_t>(rec.n_params));
      feed_u64(h, rec.diverged ? 1 : 0);
    }
  }
  return h;
}

void BenchTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << header_json(*this).dump() << '\n';
  for (const auto& e : entries_) out << detail::entry_to_json(e).dump() << '\n';
  if (!out) throw Error("write to '" + path + "' failed");
}

BenchTable BenchTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(path + ", line 1: " + e.what());
  }

  int max_epochs = 0;
  std::string dataset_name;
  std::optional<ConfigSpace> space;
  try {
    const int version = header.at("format_version").get<int>();
    if (version != 1) throw ParseError("unsupported format_version " + std::to_string(version));
    dataset_name = header.at("dataset_name").get<std::string>();
    max_epochs = header.at("max_epochs").get<int>();
    space = detail::space_from_json(header.at("space"));
  } catch (const json::exception& e) {
    throw ParseError(path + ", line 1: " + e.what());
  }

  const uint64_t expected = space->cardinality();
  std::vector<EvalEntry> entries;
  entries.reserve(expected);

  size_t line_no = 1;
  while (entries.size() < expected && std::getline(in, line)) {
    ++line_no;
    try {
      entries.push_back(detail::entry_from_json(json::parse(line)));
    } catch (const json::exception& ex) {
      throw ParseError(path + ", line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  if (entries.size() < expected)
    throw ParseError(path + ": truncated table, expected " + std::to_string(expected) +
                     " entries but found " + std::to_string(entries.size()));
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty())
      throw ParseError(path + ", line " + std::to_string(line_no) + ": trailing content after " +
                       std::to_string(expected) + " entries");
  }

  BenchTable table(std::move(*space), max_epochs, std::move(dataset_name), std::move(entries));
  table.validate();
  return table;
}

SpaceSpec load_space_spec(const std::string& path_or_name) {
  if (path_or_name == "fcnet") return SpaceSpec{fcnet_space(), {}, {}, {}};
  std::ifstream in(path_or_name);
  if (!in) throw Error("cannot open space spec '" + path_or_name + "' (not a builtin space either)");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path_or_name + ": " + e.what());
  }
  try {
    SpaceSpec spec{detail::space_from_json(j.at("space")), {}, {}, {}};
    if (j.contains("max_epochs")) spec.max_epochs = j["max_epochs"].get<int>();
    if (j.contains("n_seeds")) spec.n_seeds = j["n_seeds"].get<int>();
    if (j.contains("dataset_name")) spec.dataset_name = j["dataset_name"].get<std::string>();
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(path_or_name + ": " + e.what());
  }
}

}  // namespace tabbench
