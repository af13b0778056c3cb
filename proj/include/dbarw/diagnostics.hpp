#ifndef DBARW_DIAGNOSTICS_HPP
#define DBARW_DIAGNOSTICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbarw/engine.hpp"
#include "dbarw/rates.hpp"
#include "dbarw/rng.hpp"
#include "dbarw/validators.hpp"

namespace dbarw {

/// Sum over all enabled transitions of rate * (f_cd(successor) - f_cd(y)).
double generator_fcd_exact(const ModelSpec& model, const Configuration& y);

/// Same sum split by transition kind: walk moves, nearest branching and
/// long-range branching.  Rates include the alpha weights.
struct GeneratorParts {
  double rw = 0.0;
  double branch = 0.0;
  double long_range = 0.0;
  double total() const noexcept { return rw + branch + long_range; }
};
GeneratorParts generator_fcd_parts(const ModelSpec& model, const Configuration& y);

/// Sum_k (1{x_k = kappa} - 1{x_k = 1 - kappa}) (p_k + q_{k+1}) S(k) on the
/// height profile; the walk contribution divided by alpha1.
double flip_drift_closed_form(const ModelSpec& model, const Configuration& y);
/// alpha2 ch [sum over positive particles of b - sum over negative of b].
double excl_drift_closed_form(const ModelSpec& model, const Configuration& y);
/// Sum over particles and admissible l of sign * ch * l^2 * b_{i,l}.
double long_range_drift_closed_form(const ModelSpec& model, const Configuration& y);

/// |a - b| <= 1e-9 max(1, |a|, |b|).
bool closed_form_match(double a, double b) noexcept;

struct DriftCase {
  Configuration config = Configuration::singleton(0);
  std::size_t count = 1;
  double exact = 0.0;
  double flip_cf = 0.0;
  double excl_cf = 0.0;
  double lr_cf = 0.0;
  double bound = 0.0;
  bool ok = true;
};

struct DriftReport {
  double C = 0.0;
  double C_bar = 0.0;
  double c = 0.0;
  double s_lower = 0.0;
  double d_bar = 0.0;
  bool long_range = false;
  std::vector<DriftCase> cases;
  bool pass = true;
  std::size_t violations() const;
};

/// Absolute slack allowed on the drift inequality.
inline constexpr double kDriftSlack = 1e-12;

DriftCase drift_case(const ModelSpec& model, const Configuration& y);
/// n sampled configurations plus any explicitly listed ones.  Throws
/// ConstantsInvalid when c <= 0.
DriftReport drift_audit(const ModelSpec& model, const ConfigSampler& sampler, std::size_t n,
                        Rng& rng, const std::vector<Configuration>& extra = {});
void require_recurrence_constants(const ModelSpec& model);

/// Time-weighted occupation measure over integer values.
class Histogram {
 public:
  void add(std::int64_t value, double weight) { w_[value] += weight; }
  void merge(const Histogram& other);
  double total() const;
  /// Normalized masses (sum 1); empty when total weight is 0.
  std::map<std::int64_t, double> probabilities() const;
  const std::map<std::int64_t, double>& weights() const noexcept { return w_; }

 private:
  std::map<std::int64_t, double> w_;
};

double tv_distance(const Histogram& a, const Histogram& b);

struct RecurrenceOptions {
  double horizon = 1e4;
  /// Fraction of the horizon discarded before the width histogram starts.
  double burn_in = 0.1;
  std::vector<double> grid{1e2, 1e3, 1e4};
  /// Extra [t0, t1] windows with their own width histograms.
  std::vector<std::pair<double, double>> windows;
  std::uint64_t event_budget = default_event_budget();
};

struct RecurrenceStats {
  std::optional<double> first_hit;
  /// Times between consecutive entrances to the singleton state.
  std::vector<double> return_times;
  Histogram width_histogram;
  std::vector<Histogram> window_histograms;
  double time_avg_count = 0.0;
  double time_avg_count_post = 0.0;
  std::vector<double> grid;
  std::vector<std::int64_t> width_at;
  /// Cesaro averages of |Y| over [0, grid[k]].
  std::vector<double> cesaro_count;
  std::uint64_t n_events = 0;
};

RecurrenceStats recurrence_study(const ModelSpec& model, const Configuration& initial,
                                 const RecurrenceOptions& opt, Rng& rng);

/// Merged replica statistics.
struct RecurrenceSummary {
  std::size_t replicas = 0;
  std::size_t returned = 0;
  double mean_time_avg_count = 0.0;
  double se_time_avg_count = 0.0;
  Histogram width_histogram;
  std::vector<Histogram> window_histograms;
  std::vector<double> grid;
  /// Mean of W(t) / t across replicas.
  std::vector<double> mean_width_over_t;
  std::vector<double> return_times;
  std::uint64_t n_events = 0;
};

RecurrenceSummary summarize(const std::vector<RecurrenceStats>& runs);

}  // namespace dbarw

#endif  // DBARW_DIAGNOSTICS_HPP
