#include "otrf_cli/ingest.hpp"

#include <algorithm>
#include <boost/algorithm/string.hpp>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "otrf/error.hpp"
#include "otrf/eucrf.hpp"
#include "otrf/gp.hpp"
#include "otrf_cli/config.hpp"

namespace otrf::cli {

Dataset ingest_csv(const std::string& path, const std::string& target) {
  std::ifstream in(path);
  if (!in) throw InvalidRequest("cannot read dataset '" + path + "'");
  return parse_csv(in, target, path);
}

Dataset parse_csv(std::istream& in, const std::string& target, const std::string& source) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    boost::algorithm::trim(line);
    if (line.empty() || line[0] == '#') continue;
    boost::algorithm::split(header, line, boost::algorithm::is_any_of(","));
    for (auto& h : header) boost::algorithm::trim(h);
    break;
  }
  if (header.size() < 2) throw InvalidRequest(source + ": need a header row with at least two columns");
  std::size_t target_col = header.size() - 1;
  if (!target.empty()) {
    const auto it = std::find(header.begin(), header.end(), target);
    if (it == header.end()) throw InvalidRequest(source + ": no column named '" + target + "'");
    target_col = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> problems;
  while (std::getline(in, line)) {
    ++line_no;
    boost::algorithm::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    boost::algorithm::split(cells, line, boost::algorithm::is_any_of(","));
    if (cells.size() != header.size()) {
      problems.push_back("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                         " cells, found " + std::to_string(cells.size()));
      continue;
    }
    std::vector<double> row;
    bool ok = true;
    for (std::size_t c = 0; c < cells.size() && ok; ++c) {
      try {
        const double v = parse_double(cells[c], header[c]);
        if (!std::isfinite(v)) throw InvalidRequest(header[c] + ": non-finite value");
        row.push_back(v);
      } catch (const InvalidRequest& e) {
        problems.push_back("line " + std::to_string(line_no) + ": " + e.what());
        ok = false;
      }
    }
    if (ok) rows.push_back(std::move(row));
  }
  if (!problems.empty()) {
    std::string msg = source + ": " + std::to_string(problems.size()) + " bad row(s)";
    const std::size_t shown = std::min<std::size_t>(problems.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + problems[i];
    if (shown < problems.size()) msg += "\n  ...";
    throw InvalidRequest(msg);
  }
  if (rows.empty()) throw InvalidRequest(source + ": no data rows");

  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  data.x.resize(n, d);
  data.y.resize(n);
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target_col) data.feature_names.push_back(header[c]);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index k = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == target_col)
        data.y(i) = rows[i][c];
      else
        data.x(i, k++) = rows[i][c];
    }
  }
  return data;
}

GraphData ingest_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidRequest("cannot read graph '" + path + "'");
  return read_edge_list(in);
}

Standardizer Standardizer::fit(const Dataset& train) {
  const double n = static_cast<double>(train.x.rows());
  if (n < 1) throw InvalidRequest("standardize: empty training set");
  Standardizer s;
  s.mean = train.x.colwise().mean();
  s.scale.resize(train.x.cols());
  for (Eigen::Index c = 0; c < train.x.cols(); ++c) {
    const double var = (train.x.col(c).array() - s.mean(c)).square().sum() / n;
    s.scale(c) = var < kVarianceFloor ? 0.0 : std::sqrt(var);
  }
  s.y_mean = train.y.mean();
  const double yvar = (train.y.array() - s.y_mean).square().sum() / n;
  s.y_scale = yvar < kVarianceFloor ? 0.0 : std::sqrt(yvar);
  return s;
}

void Standardizer::apply(Dataset& data) const {
  for (Eigen::Index c = 0; c < data.x.cols(); ++c) {
    if (scale(c) == 0.0)
      data.x.col(c).setZero();
    else
      data.x.col(c) = (data.x.col(c).array() - mean(c)) / scale(c);
  }
  if (y_scale == 0.0)
    data.y.setZero();
  else
    data.y = (data.y.array() - y_mean) / y_scale;
}

namespace {

Dataset take(const Dataset& data, const std::vector<int>& idx) {
  Dataset out;
  out.feature_names = data.feature_names;
  out.x.resize(static_cast<Eigen::Index>(idx.size()), data.x.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = data.x.row(idx[i]);
    out.y(static_cast<Eigen::Index>(i)) = data.y(idx[i]);
  }
  return out;
}

std::vector<int> shuffled(int n, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace

Split make_split(const Dataset& data, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidRequest("train_fraction must lie in (0, 1)");
  const int n = static_cast<int>(data.x.rows());
  const int n_train = static_cast<int>(std::lround(train_fraction * n));
  if (n_train < 1 || n_train >= n) throw InvalidRequest("split leaves an empty train or test set");
  const auto idx = shuffled(n, rng);
  std::vector<int> tr(idx.begin(), idx.begin() + std::min(n_train, kMaxSplitPoints));
  std::vector<int> te(idx.begin() + n_train, idx.begin() + std::min(n, n_train + kMaxSplitPoints));
  Split s{take(data, tr), take(data, te)};
  const Standardizer st = Standardizer::fit(s.train);
  st.apply(s.train);
  st.apply(s.test);
  return s;
}

Dataset cap_and_standardize(const Dataset& data, int cap, Rng& rng) {
  const int n = static_cast<int>(data.x.rows());
  std::vector<int> idx;
  if (n > cap) {
    idx = shuffled(n, rng);
    idx.resize(static_cast<std::size_t>(cap));
  } else {
    idx.resize(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
  }
  Dataset out = take(data, idx);
  Standardizer::fit(out).apply(out);
  return out;
}

Dataset synthetic_regression(int n, int d, double lengthscale, double noise, Rng& rng) {
  if (n < 2 || d < 1) throw InvalidRequest("synthetic data needs n >= 2 and d >= 1");
  Dataset data;
  data.x.resize(n, d);
  for (auto& v : data.x.reshaped()) v = standard_normal(rng);
  const Eigen::MatrixXd k = gaussian_kernel_matrix(data.x, data.x, {lengthscale, 1.0, 0.0});
  const Eigen::MatrixXd l = robust_cholesky(k, "synthetic prior").matrixL();
  Eigen::VectorXd z(n);
  for (auto& v : z) v = standard_normal(rng);
  data.y = l * z;
  for (auto& v : data.y) v += noise * standard_normal(rng);
  for (int c = 0; c < d; ++c) data.feature_names.push_back("x" + std::to_string(c));
  return data;
}

}  // namespace otrf::cli
