#include "tabbench/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tabbench/error.hpp"

namespace tabbench {

namespace {

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  if (delimiter == ' ') {
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) fields.push_back(f);
    return fields;
  }
  std::string cur;
  for (char c : line) {
    if (c == delimiter) {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

RawTable read_delimited(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");

  if (delimiter == 0) delimiter = line.find(',') != std::string::npos ? ',' : ' ';

  RawTable raw;
  for (auto& f : split_fields(line, delimiter)) {
    const std::string name = trim(f);
    if (name.empty()) throw ParseError(path + ": empty column name in header");
    raw.columns.push_back(name);
  }
  const size_t ncols = raw.columns.size();

  std::vector<double> data;
  size_t nrows = 0;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, delimiter);
    if (fields.size() != ncols)
      throw ParseError(path + ", row " + std::to_string(line_no) + ": expected " +
                       std::to_string(ncols) + " fields, got " + std::to_string(fields.size()));
    for (size_t c = 0; c < ncols; ++c) {
      const std::string f = trim(fields[c]);
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v))
        throw ParseError(path + ", row " + std::to_string(line_no) + ", column '" + raw.columns[c] +
                         "': cannot parse '" + f + "' as a finite number");
      data.push_back(v);
    }
    ++nrows;
  }
  if (nrows == 0) throw ParseError(path + ": no data rows");

  raw.cells.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
  for (size_t r = 0; r < nrows; ++r) {
    for (size_t c = 0; c < ncols; ++c)
      raw.cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r * ncols + c];
  }
  return raw;
}

DatasetSplit prepare_dataset(const RawTable& raw, int target_column, double train_frac,
                             double valid_frac, Rng& rng) {
  const auto nrows = raw.cells.rows();
  const auto ncols = raw.cells.cols();
  if (nrows < 10) throw std::domain_error("dataset needs at least 10 rows");
  if (target_column < 0 || target_column >= ncols)
    throw std::domain_error("target column " + std::to_string(target_column) + " out of range");
  if (!(train_frac > 0.0) || !(valid_frac > 0.0) || train_frac + valid_frac >= 1.0)
    throw std::domain_error("split fractions must be positive and sum below 1");

  // Features constant over the combined data carry no signal; drop them.
  std::vector<Eigen::Index> feature_cols;
  for (Eigen::Index c = 0; c < ncols; ++c) {
    if (c == target_column) continue;
    const double first = raw.cells(0, c);
    bool constant = true;
    for (Eigen::Index r = 1; r < nrows && constant; ++r) constant = raw.cells(r, c) == first;
    if (!constant) feature_cols.push_back(c);
  }
  if (feature_cols.empty()) throw std::domain_error("all feature columns are constant");

  std::vector<Eigen::Index> perm(static_cast<size_t>(nrows));
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Eigen::Index>(i);
  for (size_t i = perm.size(); i-- > 1;) {
    const size_t j = rng.below(i + 1);
    std::swap(perm[i], perm[j]);
  }

  const auto n_train = static_cast<Eigen::Index>(std::llround(train_frac * static_cast<double>(nrows)));
  const auto n_valid = static_cast<Eigen::Index>(std::llround(valid_frac * static_cast<double>(nrows)));
  const auto n_test = nrows - n_train - n_valid;
  if (n_train < 2 || n_valid < 1 || n_test < 1)
    throw std::domain_error("split fractions leave an empty split");

  const auto d = static_cast<Eigen::Index>(feature_cols.size());
  DatasetSplit s;
  for (Eigen::Index c : feature_cols) s.feature_names.push_back(raw.columns[static_cast<size_t>(c)]);

  auto fill = [&](Eigen::Index offset, Eigen::Index count, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
    x.resize(count, d);
    y.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::Index r = perm[static_cast<size_t>(offset + i)];
      for (Eigen::Index j = 0; j < d; ++j) x(i, j) = raw.cells(r, feature_cols[static_cast<size_t>(j)]);
      y(i) = raw.cells(r, target_column);
    }
  };
  fill(0, n_train, s.train_x, s.train_y);
  fill(n_train, n_valid, s.valid_x, s.valid_y);
  fill(n_train + n_valid, n_test, s.test_x, s.test_y);

  // Training-split statistics; scaling divides by the variance.
  s.feature_means = s.train_x.colwise().mean();
  s.feature_scales.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var =
        (s.train_x.col(j).array() - s.feature_means(j)).square().sum() / static_cast<double>(n_train);
    s.feature_scales(j) = var > 0.0 ? var : 1.0;
  }
  s.target_mean = s.train_y.mean();
  const double tvar =
      (s.train_y.array() - s.target_mean).square().sum() / static_cast<double>(n_train);
  if (tvar <= 0.0) throw std::domain_error("target is constant on the training split");
  s.target_scale = tvar;

  auto normalize = [&](Eigen::MatrixXd& x, Eigen::VectorXd& y) {
    x.rowwise() -= s.feature_means.transpose();
    for (Eigen::Index j = 0; j < d; ++j) x.col(j) /= s.feature_scales(j);
    y = (y.array() - s.target_mean) / s.target_scale;
  };
  normalize(s.train_x, s.train_y);
  normalize(s.valid_x, s.valid_y);
  normalize(s.test_x, s.test_y);
  return s;
}

}  // namespace tabbench
