#pragma once

#include <cstdint>
#include <iosfwd>
#include "json.hpp"
#include <string>
#include <vector>

#include "otrf/couplings.hpp"
#include "otrf/graph.hpp"
#include "otrf/stats.hpp"

namespace otrf::cli {

using json = nlohmann::ordered_json;

/// Tidy per-trial table written as trials.csv.
class TrialTable {
 public:
  explicit TrialTable(std::vector<std::string> columns);

  /// Appends a row; numbers are written with round-trip precision.
  void add(std::vector<std::string> row);
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  void write(std::ostream& out) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double v);
std::string num(std::int64_t v);
inline std::string num(int v) { return num(static_cast<std::int64_t>(v)); }
inline std::string num(std::uint64_t v) { return std::to_string(v); }

/// One summary group: labels plus mean, standard error and two standard errors.
json summary_entry(json labels, const MeanSe& stat, std::size_t count);

/// Adds "normalized" / "normalized_se" to every entry, dividing by the mean of
/// the baseline coupling's entry at the same grid coordinates.
void add_normalized(json& groups, const std::string& baseline_coupling,
                    const std::vector<std::string>& grid_keys);

/// Throws NumericFailure when any number in the document is not finite.
void require_finite(const json& doc, const std::string& where);

/// Flat array of the strictly-lower Cholesky parameters, row-major.
json correlation_to_json(const CorrelationParams& params);
CorrelationParams correlation_from_json(const json& doc);

/// {"n", "p_halt", "seed", "sigma"}; sigma is 1-indexed (sigma[q] = image of tile q).
json sigma_to_json(const SigmaCoupling& sigma, std::uint64_t seed);
SigmaCoupling sigma_from_json(const json& doc);

}  // namespace otrf::cli
