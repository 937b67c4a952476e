#include "shuffled/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "shuffled/csv.hpp"
#include "shuffled/parallel.hpp"
#include "shuffled/rng.hpp"

namespace shuffled {

// ---------------------------------------------------------------------------
// Table and summaries

namespace {

std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::string join_weights(const WeightVector& w) {
  std::string out;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += format_double(w[i]);
  }
  return out;
}

WeightVector to_weights(const std::vector<double>& values) {
  return Eigen::Map<const WeightVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string Table::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << csv_cell(columns[i]);
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

NamedEstimator named_estimator(EstimatorKind kind, const FitConfig& fit, const LossSpec& loss) {
  return {std::string(to_string(kind)), EstimatorChoice{kind, loss, fit}};
}

double TrialSummary::mean() const {
  if (errors.empty()) return std::numeric_limits<double>::infinity();
  return std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
}

double TrialSummary::stddev() const {
  if (errors.size() < 2) return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (double e : errors) ss += (e - m) * (e - m);
  return std::sqrt(ss / static_cast<double>(errors.size() - 1));
}

double TrialSummary::min() const {
  return errors.empty() ? std::numeric_limits<double>::infinity()
                        : *std::min_element(errors.begin(), errors.end());
}

double TrialSummary::max() const {
  return errors.empty() ? std::numeric_limits<double>::infinity()
                        : *std::max_element(errors.begin(), errors.end());
}

double TrialSummary::mean_evaluations() const {
  if (errors.empty()) return 0.0;
  return static_cast<double>(evaluations) / static_cast<double>(errors.size());
}

namespace {

// Outcome of one fit inside a study. Trials run in parallel and write to
// their own slot; summaries are assembled afterwards in trial order.
struct TrialOutcome {
  bool ok = false;
  double error = 0.0;
  std::uint64_t evaluations = 0;
  std::string resolved;
  std::string failure;
  WeightVector weights;
  bool fallback = false;
};

void absorb(TrialSummary& summary, const TrialOutcome& outcome) {
  if (!outcome.ok) {
    ++summary.failures;
    return;
  }
  summary.errors.push_back(outcome.error);
  summary.evaluations += outcome.evaluations;
}

EstimatorChoice seeded(EstimatorChoice choice, std::uint64_t seed) {
  choice.fit.seed = seed;
  return choice;
}

TrialOutcome run_fit(const Dataset& ds, const EstimatorChoice& choice, const WeightVector& reference) {
  TrialOutcome out;
  try {
    Estimate est = estimate(ds, choice);
    out.ok = true;
    out.error = relative_error(est.fit.weights, reference);
    out.evaluations = est.fit.evaluations;
    out.resolved = std::string(to_string(est.resolved));
    out.weights = est.fit.weights;
    out.fallback = est.method == "multistart" && !est.warnings.empty() &&
                   est.warnings.back().find("no real root") != std::string::npos;
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  return out;
}

std::string summary_field(double v) { return std::isfinite(v) ? num(v) : "nan"; }

}  // namespace

// ---------------------------------------------------------------------------
// Regime sweep

void SweepGrid::validate() const {
  if (points_per_replication == 0 && n_values.empty()) {
    throw std::invalid_argument("sweep: n_values is empty");
  }
  if (d_values.empty() || replication_values.empty() || snr_db_values.empty() ||
      lambda2_values.empty()) {
    throw std::invalid_argument("sweep: every axis needs at least one value");
  }
  if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  if (estimators.empty()) throw std::invalid_argument("sweep: no estimators");
  for (std::size_t d : d_values) {
    if (d < 1) throw std::invalid_argument("sweep: d must be >= 1");
  }
  for (double l : lambda2_values) {
    if (!(l >= 0.0)) throw std::invalid_argument("sweep: lambda2 must be >= 0");
  }
}

std::string error_band(double mean_error) {
  if (mean_error < 0.05) return "<5%";
  if (mean_error <= 0.30) return "5-30%";
  return ">30%";
}

int pick_winner(const std::vector<EstimatorCell>& cells, double tie_margin) {
  int best = -1;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].summary.errors.empty()) continue;
    if (best < 0 || cells[i].summary.mean() < cells[static_cast<std::size_t>(best)].summary.mean()) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) return best;
  const double best_mean = cells[static_cast<std::size_t>(best)].summary.mean();
  int winner = -1;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& s = cells[i].summary;
    if (s.errors.empty() || s.mean() > best_mean + tie_margin) continue;
    if (winner < 0 ||
        s.mean_evaluations() < cells[static_cast<std::size_t>(winner)].summary.mean_evaluations()) {
      winner = static_cast<int>(i);
    }
  }
  return winner;
}

std::vector<CellResult> run_sweep(const SweepGrid& grid) {
  grid.validate();

  std::vector<CellResult> cells;
  const std::vector<std::size_t> ns =
      grid.points_per_replication ? std::vector<std::size_t>{0} : grid.n_values;
  for (std::size_t d : grid.d_values) {
    for (std::size_t n_axis : ns) {
      for (std::size_t r : grid.replication_values) {
        for (double snr : grid.snr_db_values) {
          for (double lambda : grid.lambda2_values) {
            CellResult c;
            c.d = d;
            c.n = grid.points_per_replication ? r * grid.points_per_replication : n_axis;
            c.replications = r;
            c.snr_db = snr;
            c.lambda2 = lambda;
            if (r > c.n) throw std::invalid_argument("sweep: R exceeds n in a cell");
            cells.push_back(std::move(c));
          }
        }
      }
    }
  }

  const std::size_t ne = grid.estimators.size();
  const std::size_t jobs = cells.size() * grid.trials;
  std::vector<std::vector<TrialOutcome>> outcomes(jobs);

  parallel_for(jobs, [&](std::size_t job) {
    const CellResult& cell = cells[job / grid.trials];
    const std::size_t trial = job % grid.trials;

    std::ostringstream coords;
    coords << "cell/n=" << cell.n << "/d=" << cell.d << "/R=" << cell.replications
           << "/snr=" << format_double(cell.snr_db) << "/l2=" << format_double(cell.lambda2);
    const std::uint64_t seed =
        derive_seed(derive_seed(grid.seed, coords.str()), static_cast<std::uint64_t>(trial));

    Rng w_rng(derive_seed(seed, "w0"));
    WeightVector w0(static_cast<Eigen::Index>(cell.d));
    for (Eigen::Index i = 0; i < w0.size(); ++i) w0[i] = w_rng.normal();

    auto& slot = outcomes[job];
    slot.resize(ne);
    try {
      const SimulatedInstance inst =
          simulate_shuffled(w0, cell.n, grid.design_mean, grid.design_std,
                            NoiseSpec::snr_db(cell.snr_db), cell.replications, seed);
      for (std::size_t e = 0; e < ne; ++e) {
        EstimatorChoice choice = grid.estimators[e].choice;
        choice.loss.lambda2 = cell.lambda2;
        slot[e] = run_fit(inst.dataset,
                          seeded(choice, derive_seed(seed, "fit/" + grid.estimators[e].name)),
                          inst.w0);
      }
    } catch (const std::exception& ex) {
      for (auto& o : slot) o.failure = ex.what();
    }
  });

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    CellResult& cell = cells[ci];
    for (std::size_t e = 0; e < ne; ++e) {
      EstimatorCell ec;
      ec.name = grid.estimators[e].name;
      for (std::size_t t = 0; t < grid.trials; ++t) {
        const TrialOutcome& o = outcomes[ci * grid.trials + t][e];
        absorb(ec.summary, o);
        if (o.ok && ec.resolved.empty()) ec.resolved = o.resolved;
        if (!o.ok && ec.first_failure.empty()) ec.first_failure = o.failure;
      }
      cell.estimators.push_back(std::move(ec));
    }
    const int w = pick_winner(cell.estimators, grid.tie_margin);
    if (w >= 0) {
      cell.winner = cell.estimators[static_cast<std::size_t>(w)].name;
      cell.error_band = error_band(cell.estimators[static_cast<std::size_t>(w)].summary.mean());
    }
  }
  return cells;
}

Table sweep_table(const std::vector<CellResult>& cells) {
  Table t;
  t.columns = {"n",         "d",        "R",        "snr_db",    "lambda2",  "estimator",
               "resolved",  "trials_ok", "failures", "mean_error", "std_error", "min_error",
               "max_error", "mean_evaluations", "winner", "first_failure"};
  for (const auto& c : cells) {
    for (const auto& e : c.estimators) {
      t.rows.push_back({num(c.n), num(c.d), num(c.replications), num(c.snr_db), num(c.lambda2),
                        e.name, e.resolved, num(e.summary.errors.size()),
                        num(e.summary.failures), summary_field(e.summary.mean()),
                        summary_field(e.summary.stddev()), summary_field(e.summary.min()),
                        summary_field(e.summary.max()), num(e.summary.mean_evaluations()),
                        c.winner == e.name ? "yes" : "no", e.first_failure});
    }
  }
  return t;
}

Table winner_map(const std::vector<CellResult>& cells) {
  Table t;
  t.columns = {"n", "d", "R", "snr_db", "lambda2", "winner", "winner_mean_error", "error_band"};
  for (const auto& c : cells) {
    double mean = std::numeric_limits<double>::infinity();
    for (const auto& e : c.estimators) {
      if (e.name == c.winner) mean = e.summary.mean();
    }
    t.rows.push_back({num(c.n), num(c.d), num(c.replications), num(c.snr_db), num(c.lambda2),
                      c.winner, summary_field(mean), c.error_band});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Consistency

std::vector<ConsistencyRow> consistency_curve(const ConsistencyStudy& study) {
  if (study.w0.empty()) throw std::invalid_argument("consistency: w0 is empty");
  if (study.trials < 1) throw std::invalid_argument("consistency: trials must be >= 1");
  if (study.estimators.empty()) throw std::invalid_argument("consistency: no estimators");
  const WeightVector w0 = to_weights(study.w0);
  const std::size_t ne = study.estimators.size();
  const std::size_t jobs = study.n_values.size() * study.trials;
  std::vector<std::vector<TrialOutcome>> outcomes(jobs);

  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t n = study.n_values[job / study.trials];
    const std::size_t trial = job % study.trials;
    const std::uint64_t seed = derive_seed(derive_seed(study.seed, "n=" + std::to_string(n)),
                                           static_cast<std::uint64_t>(trial));
    auto& slot = outcomes[job];
    slot.resize(ne);
    try {
      Scenario s;
      s.design = GaussianDesignSpec::iid(n, study.w0.size(), study.design_mean, study.design_std);
      s.w0 = study.w0;
      s.noise = NoiseSpec::sigma(study.sigma_e);
      s.design_seed = derive_seed(seed, "design");
      s.noise_seed = derive_seed(seed, "noise");
      s.shuffle = false;
      const Dataset aligned = simulate(s).dataset;
      const Dataset shuffled = shuffle_within_replications(aligned, derive_seed(seed, "perm"));
      for (std::size_t e = 0; e < ne; ++e) {
        const auto& est = study.estimators[e];
        const Dataset& data = est.choice.kind == EstimatorKind::ols ? aligned : shuffled;
        slot[e] = run_fit(data, seeded(est.choice, derive_seed(seed, "fit/" + est.name)), w0);
      }
    } catch (const std::exception& ex) {
      for (auto& o : slot) o.failure = ex.what();
    }
  });

  std::vector<ConsistencyRow> rows;
  for (std::size_t ni = 0; ni < study.n_values.size(); ++ni) {
    for (std::size_t e = 0; e < ne; ++e) {
      ConsistencyRow row;
      row.n = study.n_values[ni];
      row.estimator = study.estimators[e].name;
      row.mean_weights = WeightVector::Zero(w0.size());
      for (std::size_t t = 0; t < study.trials; ++t) {
        const TrialOutcome& o = outcomes[ni * study.trials + t][e];
        absorb(row.summary, o);
        if (o.ok) {
          row.mean_weights += o.weights;
          row.mean_norm += o.weights.norm();
        }
      }
      const auto ok = static_cast<double>(row.summary.errors.size());
      if (ok > 0) {
        row.mean_weights /= ok;
        row.mean_norm /= ok;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Table consistency_table(const std::vector<ConsistencyRow>& rows) {
  Table t;
  t.columns = {"n", "estimator", "trials_ok", "failures", "mean_error", "std_error",
               "mean_weights", "mean_norm"};
  for (const auto& r : rows) {
    t.rows.push_back({num(r.n), r.estimator, num(r.summary.errors.size()), num(r.summary.failures),
                      summary_field(r.summary.mean()), summary_field(r.summary.stddev()),
                      join_weights(r.mean_weights), num(r.mean_norm)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Replications

std::vector<ReplicationRow> replication_curve(const ReplicationStudy& study) {
  if (study.w0.empty()) throw std::invalid_argument("replication study: w0 is empty");
  for (std::size_t r : study.replications) {
    if (r < 1 || r > study.n) throw std::invalid_argument("replication study: R must lie in [1, n]");
  }
  const WeightVector w0 = to_weights(study.w0);
  const std::size_t nr = study.replications.size();
  const std::size_t jobs = study.nsr_db.size() * study.trials;
  std::vector<std::vector<TrialOutcome>> outcomes(jobs);

  parallel_for(jobs, [&](std::size_t job) {
    const double nsr = study.nsr_db[job / study.trials];
    const std::size_t trial = job % study.trials;
    const std::uint64_t seed = derive_seed(derive_seed(study.seed, "nsr=" + format_double(nsr)),
                                           static_cast<std::uint64_t>(trial));
    auto& slot = outcomes[job];
    slot.resize(nr);
    try {
      Scenario s;
      s.design = GaussianDesignSpec::iid(study.n, study.w0.size(), study.design_mean,
                                         study.design_std);
      s.w0 = study.w0;
      s.noise = NoiseSpec::nsr_db(nsr);
      s.design_seed = derive_seed(seed, "design");
      s.noise_seed = derive_seed(seed, "noise");
      s.shuffle = false;
      const Dataset aligned = simulate(s).dataset;
      for (std::size_t ri = 0; ri < nr; ++ri) {
        const std::size_t r = study.replications[ri];
        const std::string tag = "R=" + std::to_string(r);
        const Dataset split = partition_replications(aligned, r, derive_seed(seed, "split/" + tag));
        const Dataset shuffled = shuffle_within_replications(split, derive_seed(seed, "perm/" + tag));
        slot[ri] = run_fit(shuffled, seeded(study.estimator, derive_seed(seed, "fit/" + tag)), w0);
      }
    } catch (const std::exception& ex) {
      for (auto& o : slot) o.failure = ex.what();
    }
  });

  std::vector<ReplicationRow> rows;
  for (std::size_t ni = 0; ni < study.nsr_db.size(); ++ni) {
    for (std::size_t ri = 0; ri < nr; ++ri) {
      ReplicationRow row;
      row.nsr_db = study.nsr_db[ni];
      row.replications = study.replications[ri];
      for (std::size_t t = 0; t < study.trials; ++t) {
        absorb(row.summary, outcomes[ni * study.trials + t][ri]);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Table replication_table(const std::vector<ReplicationRow>& rows) {
  Table t;
  t.columns = {"nsr_db", "R", "trials_ok", "failures", "mean_error", "std_error"};
  for (const auto& r : rows) {
    t.rows.push_back({num(r.nsr_db), num(r.replications), num(r.summary.errors.size()),
                      num(r.summary.failures), summary_field(r.summary.mean()),
                      summary_field(r.summary.stddev())});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Noise adjustment

std::vector<NoiseAdjustmentRow> noise_adjustment_study(const NoiseAdjustmentStudy& study) {
  if (study.w0.empty()) throw std::invalid_argument("noise study: w0 is empty");
  const WeightVector w0 = to_weights(study.w0);
  const int order = static_cast<int>(study.w0.size());
  const std::size_t jobs = study.nsr_db.size() * study.trials;
  std::vector<std::array<TrialOutcome, 2>> outcomes(jobs);
  std::vector<double> sigmas(study.nsr_db.size(), 0.0);

  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t ni = job / study.trials;
    const std::size_t trial = job % study.trials;
    const double nsr = study.nsr_db[ni];
    const std::uint64_t seed = derive_seed(derive_seed(study.seed, "nsr=" + format_double(nsr)),
                                           static_cast<std::uint64_t>(trial));
    try {
      const SimulatedInstance inst = simulate_shuffled(w0, study.n, study.design_mean,
                                                       study.design_std, NoiseSpec::nsr_db(nsr),
                                                       1, seed);
      if (trial == 0) sigmas[ni] = inst.sigma;
      EstimatorChoice plain{EstimatorKind::sm, {}, study.fit};
      plain.loss.kind = LossKind::sm;
      EstimatorChoice adjusted = plain;
      adjusted.loss.noise_moments = gaussian_noise_moments(inst.sigma, order);
      const std::uint64_t fit_seed = derive_seed(seed, "fit");
      outcomes[job][0] = run_fit(inst.dataset, seeded(plain, fit_seed), w0);
      outcomes[job][1] = run_fit(inst.dataset, seeded(adjusted, fit_seed), w0);
    } catch (const std::exception& ex) {
      for (auto& o : outcomes[job]) o.failure = ex.what();
    }
  });

  std::vector<NoiseAdjustmentRow> rows;
  for (std::size_t ni = 0; ni < study.nsr_db.size(); ++ni) {
    NoiseAdjustmentRow row;
    row.nsr_db = study.nsr_db[ni];
    row.sigma = sigmas[ni];
    for (std::size_t t = 0; t < study.trials; ++t) {
      const auto& pair = outcomes[ni * study.trials + t];
      absorb(row.plain, pair[0]);
      absorb(row.adjusted, pair[1]);
      row.plain_fallbacks += pair[0].fallback ? 1 : 0;
      row.adjusted_fallbacks += pair[1].fallback ? 1 : 0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Table noise_adjustment_table(const std::vector<NoiseAdjustmentRow>& rows) {
  Table t;
  t.columns = {"nsr_db", "sigma", "sm_mean_error", "sm_std_error", "na_sm_mean_error",
               "na_sm_std_error", "sm_failures", "na_sm_failures", "sm_fallbacks",
               "na_sm_fallbacks"};
  for (const auto& r : rows) {
    t.rows.push_back({num(r.nsr_db), num(r.sigma), summary_field(r.plain.mean()),
                      summary_field(r.plain.stddev()), summary_field(r.adjusted.mean()),
                      summary_field(r.adjusted.stddev()), num(r.plain.failures),
                      num(r.adjusted.failures), num(r.plain_fallbacks),
                      num(r.adjusted_fallbacks)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Regularization

std::vector<RegularizationRow> regularization_study(const RegularizationStudy& study) {
  for (double l : study.lambda2) {
    if (!(l >= 0.0)) throw std::invalid_argument("regularization study: lambda2 must be >= 0");
  }
  const std::size_t nl = study.lambda2.size();
  const std::size_t jobs = study.sparsity.size() * study.trials;
  std::vector<std::vector<TrialOutcome>> outcomes(jobs);

  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t zeros = study.sparsity[job / study.trials];
    const std::size_t trial = job % study.trials;
    const std::uint64_t seed =
        derive_seed(derive_seed(study.seed, "sparsity=" + std::to_string(zeros)),
                    static_cast<std::uint64_t>(trial));
    WeightVector w0 = WeightVector::Zero(static_cast<Eigen::Index>(2 + zeros));
    w0[0] = w0[1] = 1.0;
    auto& slot = outcomes[job];
    slot.resize(nl);
    try {
      const SimulatedInstance inst = simulate_shuffled(w0, study.n, study.design_mean,
                                                       study.design_std,
                                                       NoiseSpec::sigma(study.sigma_e), 1, seed);
      for (std::size_t li = 0; li < nl; ++li) {
        EstimatorChoice choice{EstimatorKind::sm, study.loss, study.fit};
        choice.loss.kind = LossKind::sm;
        choice.loss.lambda2 = study.lambda2[li];
        slot[li] = run_fit(inst.dataset, seeded(choice, derive_seed(seed, "fit")), w0);
      }
    } catch (const std::exception& ex) {
      for (auto& o : slot) o.failure = ex.what();
    }
  });

  std::vector<RegularizationRow> rows;
  for (std::size_t si = 0; si < study.sparsity.size(); ++si) {
    for (std::size_t li = 0; li < nl; ++li) {
      RegularizationRow row;
      row.sparsity = study.sparsity[si];
      row.lambda2 = study.lambda2[li];
      for (std::size_t t = 0; t < study.trials; ++t) {
        absorb(row.summary, outcomes[si * study.trials + t][li]);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Table regularization_table(const std::vector<RegularizationRow>& rows) {
  Table t;
  t.columns = {"sparsity", "d", "lambda2", "trials_ok", "failures", "mean_error", "std_error"};
  for (const auto& r : rows) {
    t.rows.push_back({num(r.sparsity), num(r.sparsity + 2), num(r.lambda2),
                      num(r.summary.errors.size()), num(r.summary.failures),
                      summary_field(r.summary.mean()), summary_field(r.summary.stddev())});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Protocol and negative control

namespace {

ProtocolResult run_protocol(const Dataset& input, const ProtocolConfig& config, bool control) {
  if (config.trials < 1) throw std::invalid_argument("protocol: trials must be >= 1");
  const Dataset ds = config.normalize ? normalize_minmax(input).dataset
                                      : input.with_replications(std::vector<int>(input.size(), 0));
  for (std::size_t r : config.replications) {
    if (r < 1 || r > ds.size()) throw std::invalid_argument("protocol: R must lie in [1, n]");
  }
  ProtocolResult result;
  result.reference = ols_fit(ds);
  result.quality = ols_quality(ds);

  const std::size_t nr = config.replications.size();
  const std::size_t jobs = nr * config.trials;
  std::vector<TrialOutcome> outcomes(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t r = config.replications[job / config.trials];
    const std::size_t trial = job % config.trials;
    const std::uint64_t seed = derive_seed(derive_seed(config.seed, "R=" + std::to_string(r)),
                                           static_cast<std::uint64_t>(trial));
    try {
      const Dataset split = partition_replications(ds, r, derive_seed(seed, "split"));
      const Dataset shuffled = shuffle_within_replications(split, derive_seed(seed, "perm"));
      if (control) {
        TrialOutcome& o = outcomes[job];
        const WeightVector w = ols_fit(shuffled);
        o.ok = true;
        o.error = relative_error(w, result.reference);
        o.evaluations = 1;
        o.resolved = "ols";
      } else {
        outcomes[job] = run_fit(shuffled, seeded(config.estimator, derive_seed(seed, "fit")),
                                result.reference);
      }
    } catch (const std::exception& ex) {
      outcomes[job].failure = ex.what();
    }
  });

  for (std::size_t ri = 0; ri < nr; ++ri) {
    ProtocolRow row;
    row.replications = config.replications[ri];
    for (std::size_t t = 0; t < config.trials; ++t) {
      const TrialOutcome& o = outcomes[ri * config.trials + t];
      absorb(row.summary, o);
      if (o.ok && row.resolved.empty()) row.resolved = o.resolved;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace

ProtocolResult standard_dataset_protocol(const Dataset& ds, const ProtocolConfig& config) {
  return run_protocol(ds, config, false);
}

ProtocolResult negative_control(const Dataset& ds, const ProtocolConfig& config) {
  return run_protocol(ds, config, true);
}

Table protocol_table(const ProtocolResult& result) {
  Table t;
  t.columns = {"R", "resolved", "trials_ok", "failures", "mean_error", "std_error", "min_error",
               "max_error"};
  for (const auto& r : result.rows) {
    t.rows.push_back({num(r.replications), r.resolved, num(r.summary.errors.size()),
                      num(r.summary.failures), summary_field(r.summary.mean()),
                      summary_field(r.summary.stddev()), summary_field(r.summary.min()),
                      summary_field(r.summary.max())});
  }
  return t;
}

}  // namespace shuffled
