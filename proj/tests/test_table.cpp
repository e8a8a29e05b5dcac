#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tabbench/error.hpp"
#include "tabbench/table.hpp"
#include "testutil.hpp"

using namespace tabbench;
namespace fs = std::filesystem;

namespace {

// 2x3 grid, 2 seeds, 4 epochs, fully hand-written so every mean is known.
BenchTable tiny_table() {
  const ConfigSpace space = testutil::ordinal_space({2, 3});
  std::vector<EvalEntry> entries;
  for (uint64_t c = 0; c < space.cardinality(); ++c) {
    EvalEntry e;
    for (int s = 0; s < 2; ++s) {
      SeedRecord rec;
      rec.seed = s;
      const double base = 1.0 + static_cast<double>(c) + 0.25 * s;
      rec.train_curve = {base + 0.4, base + 0.3, base + 0.2, base + 0.1};
      rec.valid_curve = {base + 0.8, base + 0.6, base + 0.4, base + 0.2};
      rec.final_test_mse = base;
      rec.runtime_seconds = 10.0 + static_cast<double>(c);
      rec.n_params = 1000;
      e.records.push_back(std::move(rec));
    }
    entries.push_back(std::move(e));
  }
  return BenchTable(space, 4, "tiny", std::move(entries));
}

struct TempFile {
  std::string path;
  explicit TempFile(const char* name) {
    path = (fs::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("table") {

TEST_CASE("metric names round-trip") {
  for (const char* name : {"train", "valid", "test", "runtime", "n_params"})
    CHECK(metric_name(metric_from_name(name)) == std::string(name));
  CHECK_THROWS_AS(metric_from_name("loss"), std::domain_error);
}

TEST_CASE("construction demands one entry per grid point") {
  const ConfigSpace space = testutil::ordinal_space({2, 3});
  CHECK_THROWS_AS(BenchTable(space, 4, "x", std::vector<EvalEntry>(5)), IntegrityError);
}

TEST_CASE("query draws a stored seed and charges prorated runtime") {
  const BenchTable t = tiny_table();
  Rng rng(99);
  bool saw[2] = {false, false};
  for (int i = 0; i < 64; ++i) {
    const QueryResult q = t.query(3, 2, rng);
    REQUIRE(q.seed_drawn >= 0);
    REQUIRE(q.seed_drawn <= 1);
    saw[q.seed_drawn] = true;
    const double base = 1.0 + 3.0 + 0.25 * static_cast<double>(q.seed_drawn);
    CHECK(q.valid_mse == base + 0.6);  // epoch 2 of the stored curve
    CHECK(q.runtime_charged_seconds == (13.0 * 2.0) / 4.0);
    CHECK(q.budget_epochs == 2);
  }
  CHECK(saw[0]);
  CHECK(saw[1]);

  SUBCASE("identical rng streams give identical draws") {
    Rng a(5), b(5);
    for (int i = 0; i < 32; ++i) CHECK(t.query(1, 4, a).seed_drawn == t.query(1, 4, b).seed_drawn);
  }
  SUBCASE("budget bounds are enforced") {
    Rng r(1);
    CHECK_THROWS_AS(t.query(0, 0, r), std::out_of_range);
    CHECK_THROWS_AS(t.query(0, 5, r), std::out_of_range);
    CHECK_THROWS_AS(t.query(6, 1, r), std::out_of_range);
  }
}

TEST_CASE("mean_metric averages the seed records") {
  const BenchTable t = tiny_table();
  // Config 2: bases 3.0 and 3.25, mean base 3.125.
  CHECK(t.mean_metric(2, Metric::test) == doctest::Approx(3.125).epsilon(1e-12));
  CHECK(t.mean_metric(2, Metric::valid) == doctest::Approx(3.325).epsilon(1e-12));      // final epoch
  CHECK(t.mean_metric(2, Metric::valid, 1) == doctest::Approx(3.925).epsilon(1e-12));   // epoch 1
  CHECK(t.mean_metric(2, Metric::train, 4) == doctest::Approx(3.225).epsilon(1e-12));
  CHECK(t.mean_metric(2, Metric::runtime) == 12.0);
  CHECK(t.mean_metric(2, Metric::runtime, 1) == 3.0);  // quarter of the full run
  CHECK(t.mean_metric(2, Metric::n_params) == 1000.0);
  CHECK_THROWS_AS(t.mean_metric(2, Metric::valid, 9), std::out_of_range);
}

TEST_CASE("global optimum is the lowest mean test with ties to the lower index") {
  const BenchTable t = tiny_table();
  const auto [cfg, value] = t.global_optimum();
  CHECK(cfg == 0);
  CHECK(value == doctest::Approx(1.125).epsilon(1e-12));

  const auto& all = t.mean_test_all();
  REQUIRE(all.size() == 6);
  for (uint64_t c = 0; c < 6; ++c)
    CHECK(all[c] == doctest::Approx(t.mean_metric(c, Metric::test)).epsilon(1e-12));
}

TEST_CASE("validate accepts the hand-built table and flags corruptions") {
  BenchTable t = tiny_table();
  CHECK_NOTHROW(t.validate());

  SUBCASE("ragged curve") {
    // Rebuild with one curve cut short.
    const ConfigSpace space = testutil::ordinal_space({2});
    std::vector<EvalEntry> entries(2);
    for (auto& e : entries) {
      SeedRecord rec;
      rec.train_curve = {1.0, 1.0};
      rec.valid_curve = {1.0, 1.0};
      rec.final_test_mse = 1.0;
      rec.runtime_seconds = 1.0;
      rec.n_params = 10;
      e.records.push_back(rec);
    }
    entries[1].records[0].valid_curve.pop_back();
    const BenchTable bad(space, 2, "bad", std::move(entries));
    CHECK_THROWS_AS(bad.validate(), IntegrityError);
  }
  SUBCASE("negative loss") {
    const ConfigSpace space = testutil::ordinal_space({2});
    std::vector<EvalEntry> entries(2);
    for (auto& e : entries) {
      SeedRecord rec;
      rec.train_curve = {1.0};
      rec.valid_curve = {1.0};
      rec.final_test_mse = 1.0;
      rec.runtime_seconds = 1.0;
      rec.n_params = 10;
      e.records.push_back(rec);
    }
    entries[0].records[0].final_test_mse = -0.5;
    const BenchTable bad(space, 1, "bad", std::move(entries));
    CHECK_THROWS_AS(bad.validate(), IntegrityError);
  }
}

TEST_CASE("save and load round-trip exactly") {
  const BenchTable t = tiny_table();
  TempFile f("tabbench_test_roundtrip.tbl");
  t.save(f.path);

  const BenchTable back = BenchTable::load(f.path);
  CHECK(back.checksum() == t.checksum());
  CHECK(back.space() == t.space());
  CHECK(back.max_epochs() == 4);
  CHECK(back.n_seeds() == 2);
  CHECK(back.dataset_name() == "tiny");

  // Header line plus one line per config.
  std::ifstream in(f.path);
  size_t lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 1 + t.space().cardinality());

  // Same rng stream, same query answers, bit for bit.
  Rng a(3), b(3);
  for (int i = 0; i < 50; ++i) {
    const auto qa = t.query(4, 3, a);
    const auto qb = back.query(4, 3, b);
    CHECK(qa.valid_mse == qb.valid_mse);
    CHECK(qa.runtime_charged_seconds == qb.runtime_charged_seconds);
  }
}

TEST_CASE("checksum reacts to any stored value") {
  const ConfigSpace space = testutil::ordinal_space({2});
  auto build = [&](double tweak) {
    std::vector<EvalEntry> entries(2);
    for (auto& e : entries) {
      SeedRecord rec;
      rec.train_curve = {1.0};
      rec.valid_curve = {1.0};
      rec.final_test_mse = 1.0;
      rec.runtime_seconds = 1.0;
      rec.n_params = 10;
      e.records.push_back(rec);
    }
    entries[1].records[0].valid_curve[0] += tweak;
    return BenchTable(space, 1, "sum", std::move(entries));
  };
  CHECK(build(0.0).checksum() == build(0.0).checksum());
  CHECK(build(0.0).checksum() != build(1e-12).checksum());
}

TEST_CASE("load rejects malformed files") {
  const BenchTable t = tiny_table();
  TempFile f("tabbench_test_badfile.tbl");
  t.save(f.path);

  SUBCASE("truncated") {
    std::ifstream in(f.path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    in.close();
    lines.pop_back();
    std::ofstream out(f.path, std::ios::trunc);
    for (const auto& l : lines) out << l << '\n';
    out.close();
    CHECK_THROWS_AS(BenchTable::load(f.path), ParseError);
  }
  SUBCASE("trailing garbage") {
    std::ofstream out(f.path, std::ios::app);
    out << "{\"records\":[]}\n";
    out.close();
    CHECK_THROWS_AS(BenchTable::load(f.path), ParseError);
  }
  SUBCASE("broken json names the line") {
    std::ifstream in(f.path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    in.close();
    lines[3] = "{oops";
    std::ofstream out(f.path, std::ios::trunc);
    for (const auto& l : lines) out << l << '\n';
    out.close();
    try {
      BenchTable::load(f.path);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(BenchTable::load("/nonexistent/x.tbl"), Error); }
}

TEST_CASE("space specs load by builtin name or from json") {
  const SpaceSpec builtin = load_space_spec("fcnet");
  CHECK(builtin.space == fcnet_space());
  CHECK_FALSE(builtin.max_epochs.has_value());

  TempFile f("tabbench_test_space.json");
  {
    std::ofstream out(f.path);
    out << R"({"space":[{"name":"lr","kind":"ordinal","values":[0.1,0.2]},)"
        << R"({"name":"act","kind":"categorical","values":["relu","tanh"]}],)"
        << R"("max_epochs":7,"n_seeds":3,"dataset_name":"demo"})";
  }
  const SpaceSpec spec = load_space_spec(f.path);
  CHECK(spec.space.cardinality() == 4);
  CHECK(spec.space.param(0).kind == ParamKind::ordinal);
  CHECK(spec.space.param(1).kind == ParamKind::categorical);
  CHECK(spec.max_epochs == 7);
  CHECK(spec.n_seeds == 3);
  CHECK(spec.dataset_name == std::string("demo"));
  CHECK_THROWS_AS(load_space_spec("/nonexistent/space.json"), Error);
}

TEST_CASE("synthetic generation is reproducible per seed") {
  const ConfigSpace space = testutil::ordinal_space({3, 2});
  const BenchTable a = gen_synthetic_preset(space, "random", 2, 3, 0.1, 0.2, 42, "r");
  const BenchTable b = gen_synthetic_preset(space, "random", 2, 3, 0.1, 0.2, 42, "r");
  const BenchTable c = gen_synthetic_preset(space, "random", 2, 3, 0.1, 0.2, 43, "r");
  CHECK(a.checksum() == b.checksum());
  CHECK(a.checksum() != c.checksum());
}

}  // TEST_SUITE
