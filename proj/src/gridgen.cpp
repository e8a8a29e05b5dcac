#include "tabbench/gridgen.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "table_json.hpp"
#include "tabbench/error.hpp"
#include "tabbench/rng.hpp"

namespace tabbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int int_value(const Value& v, const std::string& param) {
  if (!v.is_number())
    throw std::domain_error("parameter '" + param + "' needs numeric values");
  const double d = v.num();
  const int i = static_cast<int>(std::llround(d));
  if (static_cast<double>(i) != d || i < 1)
    throw std::domain_error("parameter '" + param + "' needs positive integer values, got " +
                            v.to_string());
  return i;
}

double num_value(const Value& v, const std::string& param) {
  if (!v.is_number())
    throw std::domain_error("parameter '" + param + "' needs numeric values");
  return v.num();
}

std::string str_value(const Value& v, const std::string& param) {
  if (v.is_number())
    throw std::domain_error("parameter '" + param + "' needs string values, got " + v.to_string());
  return v.str();
}

}  // namespace

TrainSpec spec_from_positions(const ConfigSpace& space, std::span<const int> positions,
                              int max_epochs, uint64_t seed) {
  static const char* kRequired[] = {"init_lr",     "batch_size",  "lr_schedule",
                                    "activation1", "activation2", "layer1_size",
                                    "layer2_size", "dropout1",    "dropout2"};
  for (const char* name : kRequired) {
    if (space.param_index(name) < 0)
      throw std::domain_error(
          "space is missing parameter '" + std::string(name) +
          "' (required: init_lr, batch_size, lr_schedule, activation1, activation2, "
          "layer1_size, layer2_size, dropout1, dropout2)");
  }

  auto value_of = [&](const char* name) -> const Value& {
    const int i = space.param_index(name);
    return space.param(i).values[static_cast<size_t>(positions[static_cast<size_t>(i)])];
  };

  TrainSpec spec;
  spec.init_lr = num_value(value_of("init_lr"), "init_lr");
  spec.batch_size = int_value(value_of("batch_size"), "batch_size");
  const std::string sched = str_value(value_of("lr_schedule"), "lr_schedule");
  if (sched == "cosine") {
    spec.lr_schedule = LrSchedule::cosine;
  } else if (sched == "const" || sched == "constant" || sched == "fix") {
    spec.lr_schedule = LrSchedule::constant;
  } else {
    throw std::domain_error("unknown lr_schedule value '" + sched + "'");
  }
  auto act = [&](const char* name) {
    const std::string a = str_value(value_of(name), name);
    if (a == "relu") return Activation::relu;
    if (a == "tanh") return Activation::tanh;
    throw std::domain_error("unknown " + std::string(name) + " value '" + a + "'");
  };
  spec.act1 = act("activation1");
  spec.act2 = act("activation2");
  spec.layer1_size = int_value(value_of("layer1_size"), "layer1_size");
  spec.layer2_size = int_value(value_of("layer2_size"), "layer2_size");
  spec.dropout1 = num_value(value_of("dropout1"), "dropout1");
  spec.dropout2 = num_value(value_of("dropout2"), "dropout2");
  spec.max_epochs = max_epochs;
  spec.seed = seed;
  return spec;
}

namespace {

std::string entry_path(const std::string& dir, uint64_t config) {
  char name[32];
  std::snprintf(name, sizeof name, "entry_%010llu.json", static_cast<unsigned long long>(config));
  return (fs::path(dir) / name).string();
}

json checkpoint_meta(const ConfigSpace& space, const GridGenOptions& options, uint64_t master_seed) {
  return json{{"dataset_name", options.dataset_name},
              {"n_seeds", options.n_seeds},
              {"max_epochs", options.max_epochs},
              {"master_seed", master_seed},
              {"space", detail::space_to_json(space)}};
}

void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw Error("write to '" + tmp + "' failed");
  }
  fs::rename(tmp, path);
}

}  // namespace

std::optional<BenchTable> run_grid(const ConfigSpace& space, const DatasetSplit& data,
                                   const GridGenOptions& options, uint64_t master_seed) {
  if (options.n_seeds < 1) throw std::domain_error("n_seeds must be positive");
  if (options.max_epochs < 1) throw std::domain_error("max_epochs must be positive");
  {
    // Fail fast on an unusable space before training anything.
    const std::vector<int> zero(static_cast<size_t>(space.num_params()), 0);
    spec_from_positions(space, zero, options.max_epochs, 0);
  }

  const uint64_t n = space.cardinality();
  std::vector<EvalEntry> entries(n);
  std::vector<char> have(n, 0);

  const bool checkpointing = !options.checkpoint_dir.empty();
  if (checkpointing) {
    fs::create_directories(options.checkpoint_dir);
    const std::string meta_path = (fs::path(options.checkpoint_dir) / "meta.json").string();
    const json meta = checkpoint_meta(space, options, master_seed);
    if (fs::exists(meta_path)) {
      std::ifstream in(meta_path);
      json existing;
      try {
        existing = json::parse(in);
      } catch (const json::exception& e) {
        throw ParseError(meta_path + ": " + e.what());
      }
      if (existing != meta)
        throw IntegrityError("checkpoint dir '" + options.checkpoint_dir +
                             "' was created for a different grid run");
    } else {
      write_atomically(meta_path, meta.dump() + "\n");
    }
    for (uint64_t c = 0; c < n; ++c) {
      const std::string path = entry_path(options.checkpoint_dir, c);
      if (!fs::exists(path)) continue;
      std::ifstream in(path);
      try {
        entries[c] = detail::entry_from_json(json::parse(in));
        have[c] = 1;
      } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
      }
    }
  }

  std::vector<uint64_t> todo;
  for (uint64_t c = 0; c < n; ++c) {
    if (!have[c]) todo.push_back(c);
  }
  if (options.limit_new_configs > 0 && todo.size() > options.limit_new_configs)
    todo.resize(options.limit_new_configs);

  std::atomic<size_t> next{0};
  std::atomic<uint64_t> done{n - static_cast<uint64_t>(todo.size())};
  std::mutex io_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      {
        std::lock_guard<std::mutex> lk(failure_mutex);
        if (failure) return;
      }
      const uint64_t config = todo[i];
      try {
        const auto positions = space.decode(config);
        EvalEntry entry;
        entry.records.reserve(static_cast<size_t>(options.n_seeds));
        for (int s = 0; s < options.n_seeds; ++s) {
          const uint64_t seed = mix64(mix64(master_seed, config), static_cast<uint64_t>(s));
          const TrainSpec spec = spec_from_positions(space, positions, options.max_epochs, seed);
          entry.records.push_back(train_one(data, spec, options.timing));
        }
        {
          std::lock_guard<std::mutex> lk(io_mutex);
          if (checkpointing)
            write_atomically(entry_path(options.checkpoint_dir, config),
                             detail::entry_to_json(entry).dump() + "\n");
          entries[config] = std::move(entry);
          have[config] = 1;
          const uint64_t d = ++done;
          if (options.progress) options.progress(d, n);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1 || todo.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (uint64_t c = 0; c < n; ++c) {
    if (!have[c]) return std::nullopt;  // limited run; rest lives in the checkpoint dir
  }
  BenchTable table(space, options.max_epochs, options.dataset_name, std::move(entries));
  table.validate();
  return table;
}

BenchTable finalize_checkpoint(const std::string& checkpoint_dir) {
  const std::string meta_path = (fs::path(checkpoint_dir) / "meta.json").string();
  std::ifstream in(meta_path);
  if (!in) throw Error("cannot open '" + meta_path + "'");
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(meta_path + ": " + e.what());
  }

  ConfigSpace space = detail::space_from_json(meta.at("space"));
  const uint64_t n = space.cardinality();
  std::vector<EvalEntry> entries(n);
  for (uint64_t c = 0; c < n; ++c) {
    const std::string path = entry_path(checkpoint_dir, c);
    std::ifstream ein(path);
    if (!ein)
      throw IntegrityError("checkpoint incomplete: missing entry for config " + std::to_string(c));
    try {
      entries[c] = detail::entry_from_json(json::parse(ein));
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  BenchTable table(std::move(space), meta.at("max_epochs").get<int>(),
                   meta.at("dataset_name").get<std::string>(), std::move(entries));
  table.validate();
  return table;
}

}  // namespace tabbench
