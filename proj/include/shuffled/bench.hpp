#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shuffled/estimators.hpp"
#include "shuffled/synth.hpp"

namespace shuffled {

/// A rectangular table of already-formatted cells, written as CSV.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

struct NamedEstimator {
  std::string name;
  EstimatorChoice choice;
};
/// Named after the estimator kind, e.g. "sm" or "p1".
NamedEstimator named_estimator(EstimatorKind kind, const FitConfig& fit = {},
                               const LossSpec& loss = {});

/// Relative errors of one estimator over repeated trials. Failed trials are
/// counted but contribute no error.
struct TrialSummary {
  std::vector<double> errors;
  std::size_t failures = 0;
  std::uint64_t evaluations = 0;  ///< summed over successful trials

  double mean() const;  ///< +inf when no trial succeeded
  double stddev() const;
  double min() const;
  double max() const;
  double mean_evaluations() const;
};

// ---------------------------------------------------------------------------
// Regime sweep

struct SweepGrid {
  std::vector<std::size_t> n_values;
  std::vector<std::size_t> d_values;
  std::vector<std::size_t> replication_values{1};
  /// When nonzero, each cell uses n = R * points_per_replication and
  /// n_values is ignored.
  std::size_t points_per_replication = 0;
  std::vector<double> snr_db_values{15.0};
  std::vector<double> lambda2_values{0.0};
  std::size_t trials = 5;
  std::vector<NamedEstimator> estimators;
  std::uint64_t seed = 0;
  double design_mean = 1.0;
  double design_std = 1.0;
  /// Estimators whose mean error is within this margin of the best count as
  /// tied; the cheaper one (fewer loss evaluations) wins.
  double tie_margin = 0.02;

  void validate() const;
};

struct EstimatorCell {
  std::string name;
  std::string resolved;
  TrialSummary summary;
  std::string first_failure;
};

struct CellResult {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t replications = 1;
  double snr_db = 0.0;
  double lambda2 = 0.0;
  std::vector<EstimatorCell> estimators;
  std::string winner;      ///< empty when every estimator failed
  std::string error_band;  ///< "<5%", "5-30%" or ">30%" for the winner
};

/// Error bucket of a mean relative error.
std::string error_band(double mean_error);

/// Index of the winning estimator under the tie rule, or -1 when none
/// succeeded.
int pick_winner(const std::vector<EstimatorCell>& cells, double tie_margin);

/// For each cell and trial: w0 ~ N(0, I_d), Gaussian design, noise at the
/// cell's SNR, labels shuffled within R balanced replications; every
/// estimator fits the same instance. Per-cell seeds depend only on the master
/// seed and the cell coordinates.
std::vector<CellResult> run_sweep(const SweepGrid& grid);

Table sweep_table(const std::vector<CellResult>& cells);
/// One row per cell: coordinates, winner and error band.
Table winner_map(const std::vector<CellResult>& cells);

// ---------------------------------------------------------------------------
// Consistency curves: estimates versus n for a fixed weight vector.

struct ConsistencyStudy {
  std::vector<double> w0{1.0};
  std::vector<std::size_t> n_values{100, 1000, 10000};
  double sigma_e = 1.0;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  double design_mean = 1.0;
  double design_std = 1.0;
  /// OLS is fitted on the aligned labels; every other estimator sees them
  /// shuffled.
  std::vector<NamedEstimator> estimators;
};

struct ConsistencyRow {
  std::size_t n = 0;
  std::string estimator;
  TrialSummary summary;
  WeightVector mean_weights;
  double mean_norm = 0.0;
};

std::vector<ConsistencyRow> consistency_curve(const ConsistencyStudy& study);
Table consistency_table(const std::vector<ConsistencyRow>& rows);

// ---------------------------------------------------------------------------
// Replications: fixed n split into more and more replications.

struct ReplicationStudy {
  std::size_t n = 1000;
  std::vector<double> w0{1.0, 1.0, 1.0, 1.0};
  std::vector<double> nsr_db{-10.0};
  std::vector<std::size_t> replications{1, 2, 4, 8};
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  double design_mean = 1.0;
  double design_std = 1.0;
  EstimatorChoice estimator{EstimatorKind::sm, {}, {}};
};

struct ReplicationRow {
  double nsr_db = 0.0;
  std::size_t replications = 1;
  TrialSummary summary;
};

/// Each trial draws one design and noise realization and reuses it for every
/// R, so the curve compares replication counts on identical data.
std::vector<ReplicationRow> replication_curve(const ReplicationStudy& study);
Table replication_table(const std::vector<ReplicationRow>& rows);

// ---------------------------------------------------------------------------
// Noise-adjusted versus plain self-moments.

struct NoiseAdjustmentStudy {
  std::size_t n = 1000;
  std::vector<double> w0{1.0, -1.0};
  std::vector<double> nsr_db{-20.0, -10.0, 0.0, 5.0};
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  double design_mean = 1.0;
  double design_std = 1.0;
  FitConfig fit;
};

struct NoiseAdjustmentRow {
  double nsr_db = 0.0;
  double sigma = 0.0;
  TrialSummary plain;
  TrialSummary adjusted;
  std::size_t plain_fallbacks = 0;  ///< closed form had no real root
  std::size_t adjusted_fallbacks = 0;
};

std::vector<NoiseAdjustmentRow> noise_adjustment_study(const NoiseAdjustmentStudy& study);
Table noise_adjustment_table(const std::vector<NoiseAdjustmentRow>& rows);

// ---------------------------------------------------------------------------
// L2 regularization against sparsity.

struct RegularizationStudy {
  std::size_t n = 1000;
  /// Number of zero weights appended to w0 = [1, 1].
  std::vector<std::size_t> sparsity{0, 2, 4, 6, 8};
  std::vector<double> lambda2{0.0, 0.01, 0.1};
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  double sigma_e = 0.0;
  double design_mean = 1.0;
  double design_std = 1.0;
  LossSpec loss;  ///< kind is forced to sm; lambda2 comes from the axis
  FitConfig fit;
};

struct RegularizationRow {
  std::size_t sparsity = 0;
  double lambda2 = 0.0;
  TrialSummary summary;
};

std::vector<RegularizationRow> regularization_study(const RegularizationStudy& study);
Table regularization_table(const std::vector<RegularizationRow>& rows);

// ---------------------------------------------------------------------------
// Real-data protocol and its negative control.

struct ProtocolConfig {
  std::vector<std::size_t> replications{1, 2, 4, 6, 8};
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  bool normalize = true;
  EstimatorChoice estimator;  ///< Auto by default
};

struct ProtocolRow {
  std::size_t replications = 1;
  std::string resolved;
  TrialSummary summary;
};

struct ProtocolResult {
  WeightVector reference;  ///< OLS on the ordered (normalized) data
  FitQuality quality;
  std::vector<ProtocolRow> rows;
};

/// Normalizes (optionally), fits the ordered OLS reference, then for each R
/// and trial partitions, shuffles within replications, fits the estimator and
/// records the error against the reference.
ProtocolResult standard_dataset_protocol(const Dataset& ds, const ProtocolConfig& config);

/// Same partitions and shuffles as the protocol, but fits plain OLS to the
/// misaligned pairs.
ProtocolResult negative_control(const Dataset& ds, const ProtocolConfig& config);

Table protocol_table(const ProtocolResult& result);

}  // namespace shuffled
