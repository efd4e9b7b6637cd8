#include "otrf_cli/report.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "otrf/error.hpp"

namespace otrf::cli {

TrialTable::TrialTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void TrialTable::add(std::vector<std::string> row) {
  if (row.size() != columns_.size()) throw InvalidRequest("trial row has the wrong number of cells");
  rows_.push_back(std::move(row));
}

void TrialTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
}

std::string num(double v) {
  // Shortest representation that round-trips.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string num(std::int64_t v) { return std::to_string(v); }

json summary_entry(json labels, const MeanSe& stat, std::size_t count) {
  labels["mean"] = stat.mean;
  labels["se"] = stat.se;
  labels["two_se"] = 2.0 * stat.se;
  labels["trials"] = count;
  return labels;
}

namespace {

json grid_key(const json& entry, const std::vector<std::string>& keys) {
  json key = json::object();
  for (const auto& k : keys)
    if (entry.contains(k)) key[k] = entry[k];
  return key;
}

}  // namespace

void add_normalized(json& groups, const std::string& baseline_coupling,
                    const std::vector<std::string>& grid_keys) {
  for (auto& entry : groups) {
    const json key = grid_key(entry, grid_keys);
    for (const auto& base : groups) {
      if (base.value("coupling", "") != baseline_coupling || grid_key(base, grid_keys) != key) continue;
      const MeanSe ratio = ratio_of_means({entry["mean"].get<double>(), entry["se"].get<double>()},
                                          {base["mean"].get<double>(), base["se"].get<double>()});
      // The baseline is compared with itself: exactly 1 by definition.
      const bool self = entry.value("coupling", "") == baseline_coupling;
      entry["normalized"] = self ? 1.0 : ratio.mean;
      entry["normalized_se"] = self ? 0.0 : ratio.se;
      break;
    }
  }
}

void require_finite(const json& doc, const std::string& where) {
  if (doc.is_number_float() && !std::isfinite(doc.get<double>()))
    throw NumericFailure(where + ": non-finite result");
  if (doc.is_structured())
    for (const auto& item : doc.items()) require_finite(item.value(), where + "/" + item.key());
}

json correlation_to_json(const CorrelationParams& params) {
  const auto theta = params.theta();
  return json(std::vector<double>(theta.begin(), theta.end()));
}

CorrelationParams correlation_from_json(const json& doc) {
  if (!doc.is_array()) throw InvalidRequest("copula parameters: expected a flat JSON array");
  std::vector<double> theta;
  for (const auto& v : doc) {
    if (!v.is_number()) throw InvalidRequest("copula parameters: non-numeric entry");
    theta.push_back(v.get<double>());
  }
  // theta holds m (m - 1) / 2 entries.
  int m = 1;
  while (static_cast<std::size_t>(m) * (m - 1) / 2 < theta.size()) ++m;
  if (static_cast<std::size_t>(m) * (m - 1) / 2 != theta.size())
    throw InvalidRequest("copula parameters: " + std::to_string(theta.size()) +
                         " entries is not a triangular number");
  return CorrelationParams(m, std::move(theta));
}

json sigma_to_json(const SigmaCoupling& sigma, std::uint64_t seed) {
  std::vector<int> one_based;
  for (int s : sigma.permutation()) one_based.push_back(s + 1);
  return json{{"n", sigma.order()}, {"p_halt", sigma.geometric().p_halt()}, {"seed", seed}, {"sigma", one_based}};
}

SigmaCoupling sigma_from_json(const json& doc) {
  try {
    const int n = doc.at("n").get<int>();
    const double p_halt = doc.at("p_halt").get<double>();
    std::vector<int> zero_based;
    for (const auto& v : doc.at("sigma")) zero_based.push_back(v.get<int>() - 1);
    if (static_cast<int>(zero_based.size()) != n)
      throw InvalidRequest("sigma coupling: n does not match the permutation length");
    return SigmaCoupling(std::move(zero_based), GeometricParams(p_halt));
  } catch (const json::exception& e) {
    throw InvalidRequest(std::string("sigma coupling: ") + e.what());
  }
}

}  // namespace otrf::cli
