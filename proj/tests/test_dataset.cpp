#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "tabbench/dataset.hpp"
#include "tabbench/error.hpp"

using namespace tabbench;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const char* name, const std::string& contents) {
    path = (fs::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

RawTable demo_raw(int rows, uint64_t seed) {
  RawTable raw;
  raw.columns = {"a", "b", "c", "target"};
  raw.cells.resize(rows, 4);
  Rng rng(seed);
  for (int r = 0; r < rows; ++r) {
    const double a = rng.next_double() * 2 - 1;
    const double b = rng.next_double() * 2 - 1;
    const double c = rng.next_double() * 2 - 1;
    raw.cells(r, 0) = a;
    raw.cells(r, 1) = b;
    raw.cells(r, 2) = c;
    raw.cells(r, 3) = 2 * a - b + 0.1 * rng.normal();
  }
  return raw;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("delimited reader handles commas, whitespace and autodetection") {
  TempFile csv("tabbench_test_data.csv", "x,y,z\n1,2,3\n4, 5 ,6\n\n7,8,9\n");
  const RawTable a = read_delimited(csv.path);
  CHECK(a.columns == std::vector<std::string>{"x", "y", "z"});
  CHECK(a.cells.rows() == 3);
  CHECK(a.cells(1, 1) == 5.0);
  CHECK(a.cells(2, 2) == 9.0);

  TempFile ws("tabbench_test_data.txt", "x y z\n1 2 3\n4   5\t6\n");
  const RawTable b = read_delimited(ws.path);
  CHECK(b.cells.rows() == 2);
  CHECK(b.cells(1, 0) == 4.0);
}

TEST_CASE("delimited reader reports location of bad cells") {
  TempFile bad("tabbench_test_bad.csv", "x,y\n1,2\n3,oops\n");
  try {
    read_delimited(bad.path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("'y'") != std::string::npos);
  }
  TempFile ragged("tabbench_test_ragged.csv", "x,y\n1,2,3\n");
  CHECK_THROWS_AS(read_delimited(ragged.path), ParseError);
  TempFile empty("tabbench_test_empty.csv", "");
  CHECK_THROWS_AS(read_delimited(empty.path), ParseError);
  CHECK_THROWS_AS(read_delimited("/nonexistent/nope.csv"), Error);
}

TEST_CASE("split sizes follow rounded fractions and shuffling is seeded") {
  const RawTable raw = demo_raw(23, 1);
  Rng rng(42);
  const DatasetSplit s = prepare_dataset(raw, 3, 0.6, 0.2, rng);
  CHECK(s.train_x.rows() == 14);  // llround(0.6 * 23)
  CHECK(s.valid_x.rows() == 5);   // llround(0.2 * 23)
  CHECK(s.test_x.rows() == 4);    // remainder
  CHECK(s.train_x.cols() == 3);
  CHECK(s.feature_names == std::vector<std::string>{"a", "b", "c"});

  Rng rng2(42);
  const DatasetSplit t = prepare_dataset(raw, 3, 0.6, 0.2, rng2);
  CHECK((s.train_x - t.train_x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.train_y - t.train_y).cwiseAbs().maxCoeff() == 0.0);

  Rng rng3(43);
  const DatasetSplit u = prepare_dataset(raw, 3, 0.6, 0.2, rng3);
  CHECK((s.train_y - u.train_y).cwiseAbs().maxCoeff() > 0.0);  // different shuffle
}

TEST_CASE("normalization uses training-split mean and variance") {
  const RawTable raw = demo_raw(50, 2);
  Rng rng(7);
  const DatasetSplit s = prepare_dataset(raw, 3, 0.6, 0.2, rng);

  for (int j = 0; j < 3; ++j) {
    CHECK(s.train_x.col(j).mean() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    // x was divided by the raw variance, so the normalized variance equals
    // one over the raw variance.
    const double var =
        (s.train_x.col(j).array() - s.train_x.col(j).mean()).square().sum() / s.train_x.rows();
    CHECK(var == doctest::Approx(1.0 / s.feature_scales(j)).epsilon(1e-10));
  }
  CHECK(s.train_y.mean() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  // Round-trip through denormalize_target.
  const double y0 = s.test_y(0);
  CHECK(denormalize_target(s, y0) == y0 * s.target_scale + s.target_mean);
}

TEST_CASE("constant features are dropped, constant targets rejected") {
  RawTable raw = demo_raw(20, 3);
  raw.cells.col(1).setConstant(5.0);
  Rng rng(1);
  const DatasetSplit s = prepare_dataset(raw, 3, 0.6, 0.2, rng);
  CHECK(s.feature_names == std::vector<std::string>{"a", "c"});
  CHECK(s.train_x.cols() == 2);

  RawTable flat = demo_raw(20, 4);
  flat.cells.col(3).setConstant(1.0);
  Rng rng2(1);
  CHECK_THROWS_AS(prepare_dataset(flat, 3, 0.6, 0.2, rng2), std::domain_error);
}

TEST_CASE("argument validation") {
  const RawTable raw = demo_raw(20, 5);
  Rng rng(1);
  CHECK_THROWS_AS(prepare_dataset(raw, 9, 0.6, 0.2, rng), std::domain_error);
  CHECK_THROWS_AS(prepare_dataset(raw, 3, 0.9, 0.2, rng), std::domain_error);
  CHECK_THROWS_AS(prepare_dataset(raw, 3, 0.0, 0.2, rng), std::domain_error);
  const RawTable small = demo_raw(5, 6);
  CHECK_THROWS_AS(prepare_dataset(small, 3, 0.6, 0.2, rng), std::domain_error);
}

}  // TEST_SUITE
