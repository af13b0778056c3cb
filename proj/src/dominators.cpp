#include "dbarw/dominators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dbarw/error.hpp"

namespace dbarw {

double BOfTable::operator()(std::int64_t N) {
  if (N < 1) return 0.0;
  while (static_cast<std::int64_t>(running_.size()) <= N) {
    auto n = static_cast<double>(running_.size());
    running_.push_back(std::max(running_.back(), n * b_n_(n)));
  }
  return running_[static_cast<std::size_t>(N)];
}

double B_of(const ScalarFunction& b_n, std::int64_t N) { return BOfTable(b_n)(N); }

std::optional<std::int64_t> find_N0(const ScalarFunction& b_n, double D_bar,
                                    std::int64_t n_audit) {
  if (b_n.kind() == ScalarFunction::Kind::constant) return 1;
  // Scan downwards: N0 is one past the last failing M.
  std::vector<double> running(static_cast<std::size_t>(n_audit) + 1, 0.0);
  for (std::int64_t m = 1; m <= n_audit; ++m) {
    running[m] = std::max(running[m - 1], b_n(static_cast<double>(m)));
  }
  std::int64_t last_fail = 0;
  for (std::int64_t m = 1; m <= n_audit; ++m) {
    if (running[m] > D_bar * static_cast<double>(m)) last_fail = m;
  }
  if (last_fail >= n_audit) return std::nullopt;
  return last_fail + 1;
}

double K_threshold(double alpha1, double alpha2, const ScalarFunction& b_n, std::int64_t N0,
                   double D_bar) {
  double bmax = 0.0;
  for (std::int64_t n = 1; n <= N0; ++n) bmax = std::max(bmax, b_n(static_cast<double>(n)));
  return std::max(2 * alpha1 + 2 * alpha2 * bmax, 2 * alpha1 + 2 * alpha2 * D_bar);
}

DominatorParams make_dominator_params(const ModelSpec& model, std::int64_t w0, std::int64_t n0,
                                      double K, std::size_t steps) {
  const auto& c = model.constants;
  DominatorParams p;
  p.w0 = w0;
  p.n0 = n0;
  p.K = K;
  p.alpha1 = model.alpha1;
  p.alpha2 = model.alpha2;
  p.B_n = c.B_n;
  p.B_bar = c.B_bar;
  p.D_bar = c.D_bar;
  auto n0_found = find_N0(c.B_n, c.D_bar, c.n_audit);
  if (!n0_found) {
    throw Error(Errc::ConstantsInvalid, "no N0 with max_{m<=M} B_m <= D_bar*M up to M = " +
                                            std::to_string(c.n_audit));
  }
  p.N0 = *n0_found;
  p.K_min = K_threshold(p.alpha1, p.alpha2, c.B_n, p.N0, c.D_bar);
  BOfTable bof(c.B_n);
  for (std::size_t k = 0; k < steps; ++k) {
    p.B_of_N.push_back(bof(n0 + 2 * static_cast<std::int64_t>(k)));
  }
  if (model.has_long_range()) {
    for (int l = 2; l <= model.max_range(); ++l) p.D += c.B_tilde(l);
  }
  if (!std::isfinite(p.D)) throw Error(Errc::ConstantsInvalid, "D = sum B_tilde(l) diverges");
  return p;
}

double m_tilde(double alpha1, double alpha2, const ScalarFunction& b_n, std::int64_t n0,
               std::int64_t n) {
  std::int64_t m = n0 + 2 * n;
  return 1.0 / (alpha1 * static_cast<double>(m) + alpha2 * B_of(b_n, m));
}

std::string_view dominator_kind_name(DominatorEventKind kind) {
  switch (kind) {
    case DominatorEventKind::start: return "start";
    case DominatorEventKind::q_birth: return "q_birth";
    case DominatorEventKind::h_double: return "h_double";
    case DominatorEventKind::h_step: return "h_step";
  }
  return "?";
}

DominatorEventKind parse_dominator_kind(std::string_view name) {
  if (name == "start") return DominatorEventKind::start;
  if (name == "q_birth") return DominatorEventKind::q_birth;
  if (name == "h_double") return DominatorEventKind::h_double;
  if (name == "h_step") return DominatorEventKind::h_step;
  throw Error(Errc::ConfigParse, "unknown dominator event kind '" + std::string(name) + "'");
}

DominatorPath sample_Q(std::int64_t w0, double K, double horizon, Rng& rng,
                       std::uint64_t max_events) {
  if (w0 < 1) throw Error(Errc::InvalidParameter, "w0 must be >= 1");
  if (!(K > 0.0)) throw Error(Errc::InvalidParameter, "K must be > 0");
  DominatorPath path{{0.0, DominatorEventKind::start, w0 + 1}};
  std::int64_t q = w0 + 1;
  double t = 0.0;
  while (true) {
    double dt = rng.exponential(K * static_cast<double>(q));
    if (t + dt > horizon) break;
    if (path.size() > max_events) {
      throw Error(Errc::EventBudgetExceeded, "sample_Q exceeded its event budget");
    }
    t += dt;
    if (q == std::numeric_limits<std::int64_t>::max()) throw Error(Errc::Overflow, "Q overflow");
    ++q;
    path.push_back({t, DominatorEventKind::q_birth, q});
  }
  return path;
}

DominatorPath sample_H(std::int64_t w0, double alpha1, double alpha2, double B_bar, double D,
                       double horizon, Rng& rng, double h_factor, std::uint64_t max_events) {
  if (w0 < 1) throw Error(Errc::InvalidParameter, "w0 must be >= 1");
  if (alpha1 < 0 || alpha2 < 0 || B_bar < 0 || D < 0 || !(h_factor > 0)) {
    throw Error(Errc::InvalidParameter, "sample_H needs nonnegative rates and h_factor > 0");
  }
  DominatorPath path{{0.0, DominatorEventKind::start, w0}};
  double jump = alpha1 + D;
  double rate = h_factor * (alpha1 + alpha2 * B_bar + D);
  if (!(jump > 0.0) || !(rate > 0.0)) return path;
  double p_double = D / jump;
  std::int64_t h = w0;
  double t = 0.0;
  while (true) {
    double dt = rng.exponential(rate);
    if (t + dt > horizon) break;
    if (path.size() > max_events) {
      throw Error(Errc::EventBudgetExceeded, "sample_H exceeded its event budget");
    }
    t += dt;
    bool dbl = rng.uniform() < p_double;
    std::int64_t next;
    if (__builtin_add_overflow(h, dbl ? h : 1, &next)) {
      throw Error(Errc::Overflow, "H overflow at time " + std::to_string(t));
    }
    h = next;
    path.push_back({t, dbl ? DominatorEventKind::h_double : DominatorEventKind::h_step, h});
  }
  return path;
}

std::int64_t path_value_at(const DominatorPath& path, double t) {
  auto it = std::upper_bound(path.begin(), path.end(), t,
                             [](double x, const DominatorPoint& p) { return x < p.time; });
  if (it == path.begin()) return path.front().value;
  return std::prev(it)->value;
}

}  // namespace dbarw
