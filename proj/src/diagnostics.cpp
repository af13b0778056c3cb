#include "dbarw/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace dbarw {

GeneratorParts generator_fcd_parts(const ModelSpec& model, const Configuration& y) {
  GeneratorParts parts;
  const auto base = static_cast<double>(f_cd(y));
  for (const auto& t : enumerate_transitions(model, y, true)) {
    double d = t.rate * (static_cast<double>(f_cd(*t.successor)) - base);
    switch (t.kind) {
      case TransitionKind::rw_left:
      case TransitionKind::rw_right: parts.rw += d; break;
      case TransitionKind::branch: parts.branch += d; break;
      case TransitionKind::long_branch: parts.long_range += d; break;
    }
  }
  return parts;
}

double generator_fcd_exact(const ModelSpec& model, const Configuration& y) {
  const auto base = static_cast<double>(f_cd(y));
  double s = 0.0;
  for (const auto& t : enumerate_transitions(model, y, true)) {
    s += t.rate * (static_cast<double>(f_cd(*t.successor)) - base);
  }
  return s;
}

double flip_drift_closed_form(const ModelSpec& model, const Configuration& y) {
  if (!model.walk) return 0.0;
  const int kap = kappa(y);
  const HeightFunction x = to_height(y);
  const Site lo = y.left();
  const Site hi = y.right();
  // Outside [lo, hi - 1] the profile equals its limits, which never enter S(k).
  const auto n = static_cast<std::size_t>(hi - lo);
  std::vector<std::int64_t> kap_prefix(n + 1, 0);  // # kappa cells in [lo, lo + i)
  std::vector<std::int64_t> anti_suffix(n + 1, 0);  // # (1 - kappa) cells in [lo + i, hi)
  for (std::size_t i = 0; i < n; ++i) {
    kap_prefix[i + 1] = kap_prefix[i] + (x.at(lo + static_cast<Site>(i)) == kap);
  }
  for (std::size_t i = n; i-- > 0;) {
    anti_suffix[i] = anti_suffix[i + 1] + (x.at(lo + static_cast<Site>(i)) != kap);
  }
  auto clamp_idx = [&](Site cell) {
    return static_cast<std::size_t>(std::clamp<Site>(cell - lo, 0, static_cast<Site>(n)));
  };
  auto S = [&](Site k) -> double {
    std::int64_t left = kap_prefix[clamp_idx(k)];
    std::int64_t right = anti_suffix[clamp_idx(k + 1)];
    return static_cast<double>(left - right);
  };
  double total = 0.0;
  for (Site k = lo - 1; k <= hi; ++k) {
    double rate = pq_view(model, y, k).p + pq_view(model, y, k + 1).q;
    if (rate == 0.0) continue;
    double sgn = x.at(k) == kap ? 1.0 : -1.0;
    total += sgn * rate * S(k);
  }
  return total;
}

double excl_drift_closed_form(const ModelSpec& model, const Configuration& y) {
  if (!model.branch) return 0.0;
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < y.count(); ++i) {
    double b = model.branch->branch_rate(y, i);
    (y[i].sign == Sign::plus ? plus : minus) += b;
  }
  return model.alpha2 * y.charge() * (plus - minus);
}

double long_range_drift_closed_form(const ModelSpec& model, const Configuration& y) {
  if (!model.long_range) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < y.count(); ++i) {
    for (int l = 2; l <= model.long_range->max_range(); ++l) {
      if (!careful_condition(y, y[i].position, l)) break;
      total += value(y[i].sign) * y.charge() * static_cast<double>(l) * l *
               model.long_range->long_branch_rate(y, i, l);
    }
  }
  return total;
}

bool closed_form_match(double a, double b) noexcept {
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

std::size_t DriftReport::violations() const {
  return static_cast<std::size_t>(
      std::count_if(cases.begin(), cases.end(), [](const DriftCase& c) { return !c.ok; }));
}

DriftCase drift_case(const ModelSpec& model, const Configuration& y) {
  DriftCase d;
  d.config = y;
  d.count = y.count();
  d.exact = generator_fcd_exact(model, y);
  d.flip_cf = flip_drift_closed_form(model, y);
  d.excl_cf = excl_drift_closed_form(model, y);
  d.lr_cf = long_range_drift_closed_form(model, y);
  d.bound = model.drift_C_bar() - model.drift_c() * static_cast<double>(y.count());
  bool match = closed_form_match(model.alpha1 * d.flip_cf + d.excl_cf + d.lr_cf, d.exact);
  d.ok = match && d.exact <= d.bound + kDriftSlack;
  return d;
}

void require_recurrence_constants(const ModelSpec& model) {
  if (!(model.drift_c() > 0.0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "positive recurrence needs alpha1*s_lower > 2*alpha2*d_bar; got %.17g <= %.17g",
                  model.alpha1 * model.constants.s_lower,
                  2 * model.alpha2 * model.constants.d_bar);
    throw Error(Errc::ConstantsInvalid, buf);
  }
}

DriftReport drift_audit(const ModelSpec& model, const ConfigSampler& sampler, std::size_t n,
                        Rng& rng, const std::vector<Configuration>& extra) {
  require_recurrence_constants(model);
  DriftReport rep;
  rep.C = model.drift_C();
  rep.C_bar = model.drift_C_bar();
  rep.c = model.drift_c();
  rep.s_lower = model.constants.s_lower;
  rep.d_bar = model.constants.d_bar;
  rep.long_range = model.has_long_range();
  for (const auto& y : extra) rep.cases.push_back(drift_case(model, y));
  for (std::size_t k = 0; k < n; ++k) rep.cases.push_back(drift_case(model, sampler(rng)));
  rep.pass = rep.violations() == 0;
  return rep;
}

void Histogram::merge(const Histogram& other) {
  for (const auto& [v, w] : other.w_) w_[v] += w;
}

double Histogram::total() const {
  double s = 0.0;
  for (const auto& [v, w] : w_) s += w;
  return s;
}

std::map<std::int64_t, double> Histogram::probabilities() const {
  std::map<std::int64_t, double> out;
  double tot = total();
  if (!(tot > 0.0)) return out;
  for (const auto& [v, w] : w_) out[v] = w / tot;
  return out;
}

double tv_distance(const Histogram& a, const Histogram& b) {
  auto pa = a.probabilities();
  auto pb = b.probabilities();
  double s = 0.0;
  for (const auto& [v, p] : pa) {
    auto it = pb.find(v);
    s += std::fabs(p - (it == pb.end() ? 0.0 : it->second));
  }
  for (const auto& [v, p] : pb) {
    if (!pa.count(v)) s += p;
  }
  return 0.5 * s;
}

namespace {

class RecurrenceObserver : public PathObserver {
 public:
  RecurrenceObserver(const RecurrenceOptions& opt, RecurrenceStats& st)
      : opt_(opt), st_(st), burn_(opt.burn_in * opt.horizon) {
    st_.window_histograms.resize(opt.windows.size());
    st_.grid = opt.grid;
    st_.width_at.assign(opt.grid.size(), -1);
    st_.cesaro_count.assign(opt.grid.size(), 0.0);
  }

  void hold(const Configuration& y, double t0, double t1) override {
    auto w = y.width();
    auto n = static_cast<double>(y.count());
    auto overlap = [&](double a, double b) { return std::max(0.0, std::min(t1, b) - std::max(t0, a)); };
    double post = overlap(burn_, opt_.horizon);
    if (post > 0) {
      st_.width_histogram.add(w, post);
      count_post_ += n * post;
    }
    for (std::size_t k = 0; k < opt_.windows.size(); ++k) {
      double o = overlap(opt_.windows[k].first, opt_.windows[k].second);
      if (o > 0) st_.window_histograms[k].add(w, o);
    }
    for (std::size_t k = 0; k < opt_.grid.size(); ++k) {
      double g = opt_.grid[k];
      if (st_.width_at[k] < 0 && t0 <= g && (g < t1 || (g == opt_.horizon && t1 >= g))) {
        st_.width_at[k] = w;
        st_.cesaro_count[k] = g > 0 ? (count_int_ + n * (g - t0)) / g : n;
      }
    }
    count_int_ += n * (t1 - t0);
    end_ = t1;
  }

  void event(const Event& e, const Configuration& post) override {
    if (!post.is_singleton()) return;
    if (last_entry_) st_.return_times.push_back(e.time - *last_entry_);
    if (!st_.first_hit) st_.first_hit = e.time;
    last_entry_ = e.time;
  }

  void finish() {
    st_.time_avg_count = end_ > 0 ? count_int_ / end_ : 0.0;
    double span = std::max(0.0, end_ - burn_);
    st_.time_avg_count_post = span > 0 ? count_post_ / span : st_.time_avg_count;
  }

  void start_at_singleton() { last_entry_ = 0.0; }

 private:
  const RecurrenceOptions& opt_;
  RecurrenceStats& st_;
  double burn_;
  double count_int_ = 0.0;
  double count_post_ = 0.0;
  double end_ = 0.0;
  std::optional<double> last_entry_;
};

}  // namespace

RecurrenceStats recurrence_study(const ModelSpec& model, const Configuration& initial,
                                 const RecurrenceOptions& opt, Rng& rng) {
  require_recurrence_constants(model);
  RecurrenceStats st;
  RecurrenceObserver obs(opt, st);
  if (initial.is_singleton()) obs.start_at_singleton();
  StopRule stop;
  stop.horizon = opt.horizon;
  Trajectory tr = simulate(model, initial, stop, rng, RecordMode::summary, 0, &obs,
                           opt.event_budget);
  st.n_events = tr.n_events;
  obs.finish();
  return st;
}

RecurrenceSummary summarize(const std::vector<RecurrenceStats>& runs) {
  RecurrenceSummary s;
  s.replicas = runs.size();
  if (runs.empty()) return s;
  s.grid = runs.front().grid;
  s.mean_width_over_t.assign(s.grid.size(), 0.0);
  s.window_histograms.resize(runs.front().window_histograms.size());
  double sum = 0.0, sum2 = 0.0;
  for (const auto& r : runs) {
    if (r.first_hit) ++s.returned;
    sum += r.time_avg_count;
    sum2 += r.time_avg_count * r.time_avg_count;
    s.width_histogram.merge(r.width_histogram);
    for (std::size_t k = 0; k < s.window_histograms.size() && k < r.window_histograms.size(); ++k) {
      s.window_histograms[k].merge(r.window_histograms[k]);
    }
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
      if (s.grid[k] > 0) s.mean_width_over_t[k] += static_cast<double>(r.width_at[k]) / s.grid[k];
    }
    s.return_times.insert(s.return_times.end(), r.return_times.begin(), r.return_times.end());
    s.n_events += r.n_events;
  }
  auto n = static_cast<double>(runs.size());
  s.mean_time_avg_count = sum / n;
  if (runs.size() > 1) {
    double var = std::max(0.0, (sum2 - n * s.mean_time_avg_count * s.mean_time_avg_count) / (n - 1));
    s.se_time_avg_count = std::sqrt(var / n);
  }
  for (auto& v : s.mean_width_over_t) v /= n;
  return s;
}

}  // namespace dbarw
