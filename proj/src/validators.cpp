#include "dbarw/validators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace dbarw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Keeps the most negative slack and its witness.
struct Worst {
  double margin = kInf;
  std::optional<std::string> witness;

  void offer(double slack, const std::string& what) {
    if (slack < margin) {
      margin = slack;
      witness = what;
    }
  }
};

ValidationReport finish(const std::string& name, std::size_t samples, const Worst& w, bool pass) {
  ValidationReport r;
  r.assumption = name;
  r.audited_samples = samples;
  r.margin = std::isfinite(w.margin) ? w.margin : 0.0;
  // Floating-point slack shared with the drift inequality.
  r.pass = pass && !(w.margin < -1e-12);
  if (!r.pass) r.worst_witness = w.witness;
  return r;
}

std::string describe(const Configuration& y, std::size_t idx, const std::string& what) {
  std::ostringstream os;
  os << to_string(y) << " at site " << y[idx].position << ": " << what;
  return os.str();
}

}  // namespace

Configuration ConfigSampler::operator()(Rng& rng) const {
  std::int64_t cap_count = std::min<std::int64_t>(static_cast<std::int64_t>(max_count), max_width);
  if (cap_count < 1) throw Error(Errc::InvalidParameter, "sampler bounds admit no configuration");
  std::int64_t odd_choices = (cap_count + 1) / 2;
  std::int64_t n = 2 * rng.between(0, odd_choices - 1) + 1;
  std::int64_t width = rng.between(n, std::max<std::int64_t>(n, max_width));
  std::set<Site> pos{0};
  if (n > 1) pos.insert(width - 1);
  while (static_cast<std::int64_t>(pos.size()) < n) pos.insert(rng.between(1, width - 2));
  Site shift = offset > 0 ? rng.between(-offset, offset) : 0;
  int ch = charge != 0 ? charge : (rng.below(2) == 0 ? 1 : -1);
  std::vector<Particle> ps;
  Sign s = ch > 0 ? Sign::plus : Sign::minus;
  for (Site p : pos) {
    ps.push_back({p + shift, s});
    s = opposite(s);
  }
  return Configuration::from_particles(std::move(ps));
}

std::vector<double> rate_vector(const ModelSpec& model, const Configuration& y, std::size_t idx) {
  std::vector<double> out;
  RwRates rr = model.walk ? model.walk->rw_rates(y, idx) : RwRates{};
  out.push_back(rr.r);
  out.push_back(rr.l);
  out.push_back(model.branch ? model.branch->branch_rate(y, idx) : 0.0);
  if (model.long_range) {
    for (int l = 2; l <= model.long_range->max_range(); ++l) {
      out.push_back(model.long_range->long_branch_rate(y, idx, l));
    }
  }
  return out;
}

ValidationReport validate_A0(const ModelSpec& model, const AuditOptions& opt, Rng& rng) {
  Worst w;
  double max_disc = 0.0;
  for (std::size_t s = 0; s < opt.samples; ++s) {
    Configuration y = opt.sampler(rng);
    Configuration z = y.translated(1);
    for (std::size_t i = 0; i < y.count(); ++i) {
      auto a = rate_vector(model, y, i);
      auto b = rate_vector(model, z, i);
      for (std::size_t k = 0; k < a.size(); ++k) {
        double d = std::abs(a[k] - b[k]);
        if (!(d == 0.0)) {
          if (std::isnan(d)) d = kInf;
          max_disc = std::max(max_disc, d);
          w.offer(-d, describe(y, i, "rate #" + std::to_string(k) + " changes under a unit shift"));
        }
      }
    }
  }
  auto r = finish("A0", opt.samples, w, max_disc == 0.0);
  r.margin = 0.0 - max_disc;
  r.details["max_discrepancy"] = max_disc;
  return r;
}

ValidationReport validate_A1(const ModelSpec& model, const AuditOptions& opt, Rng& rng) {
  Worst w;
  const double s_lower = model.constants.s_lower;
  double inf_seen = kInf;
  double sup_seen = 0.0;
  for (std::size_t s = 0; s < opt.samples; ++s) {
    Configuration y = s == 0 ? Configuration::singleton(0) : opt.sampler(rng);
    for (std::size_t i = 0; i < y.count(); ++i) {
      RwRates p = model.walk->rw_rates_as(y, i, Sign::plus);
      RwRates m = model.walk->rw_rates_as(y, i, Sign::minus);
      for (double v : {p.r, p.l, m.r, m.l}) {
        if (!(v >= 0) || !std::isfinite(v)) w.offer(-kInf, describe(y, i, "rate negative or not finite"));
      }
      double lo = std::min(p.r, p.l) + std::min(m.r, m.l);
      double hi = p.r + p.l + m.r + m.l;
      inf_seen = std::min(inf_seen, lo);
      sup_seen = std::max(sup_seen, hi);
      w.offer(lo - s_lower, describe(y, i, "min-rate sum " + std::to_string(lo) + " below s_lower"));
      w.offer(1.0 - hi, describe(y, i, "four-rate sum " + std::to_string(hi) + " exceeds 1"));
    }
  }
  bool declared_ok = s_lower > 0 && s_lower < 1 && s_lower < sup_seen;
  auto r = finish("A1", opt.samples, w, declared_ok);
  if (!declared_ok && !r.worst_witness) r.worst_witness = "declared s_lower must satisfy 0 < s_lower < sup";
  r.details["sampled_inf"] = inf_seen;
  r.details["sampled_sup"] = sup_seen;
  r.details["s_lower"] = s_lower;
  return r;
}

ValidationReport validate_A2(const ModelSpec& model, const AuditOptions& opt, Rng& rng) {
  Worst w;
  const auto& k = model.constants;
  double max_drift_ratio = -kInf;
  for (std::size_t s = 0; s < opt.samples; ++s) {
    Configuration y = s == 0 ? Configuration::singleton(0) : opt.sampler(rng);
    const double n = static_cast<double>(y.count());
    double bn = k.B_n(n);
    double plus_sum = 0.0;
    double minus_sum = 0.0;
    for (std::size_t i = 0; i < y.count(); ++i) {
      double both = model.branch->branch_rate_as(y, i, Sign::plus) +
                    model.branch->branch_rate_as(y, i, Sign::minus);
      if (!(both > 0)) w.offer(-kInf, describe(y, i, "branch rate sum is not positive"));
      w.offer(bn - both, describe(y, i, "branch rate sum " + std::to_string(both) + " exceeds B_n"));
      double own = model.branch->branch_rate(y, i);
      (y[i].sign == Sign::plus ? plus_sum : minus_sum) += own;
    }
    double drift = y.charge() * (plus_sum - minus_sum);
    max_drift_ratio = std::max(max_drift_ratio, drift / n);
    w.offer(k.d_bar * n - drift, to_string(y) + ": branch drift " + std::to_string(drift) +
                                     " exceeds d_bar |y|");
  }
  // Series and growth conditions on the declared table.
  const int n_audit = std::max(2, k.n_audit);
  double series = 0.0;
  double half_series = 0.0;
  double running = 0.0;
  double max_bn = 0.0;
  for (int N = 1; N <= n_audit; ++N) {
    running = std::max(running, N * k.B_n(N));
    max_bn = std::max(max_bn, k.B_n(N));
    series += 1.0 / running;
    if (N == n_audit / 2) half_series = series;
  }
  double increment = series - half_series;
  bool diverges = increment >= 1e-3;
  double growth = max_bn / n_audit;
  bool growth_ok = growth < k.D_bar;
  if (!diverges) w.offer(-1.0, "sum of 1/B(N) appears to converge");
  if (!growth_ok) w.offer(-1.0, "max B_n / N is not below D_bar at the audit horizon");
  auto r = finish("A2", opt.samples, w, true);
  r.details["series_sum"] = series;
  r.details["series_tail_increment"] = increment;
  r.details["series_diverges"] = diverges;
  r.details["max_Bn_over_N"] = growth;
  r.details["D_bar"] = k.D_bar;
  r.details["max_drift_per_particle"] = max_drift_ratio;
  r.details["n_audit"] = n_audit;
  return r;
}

ValidationReport validate_A3(const ModelSpec& model, const AuditOptions& opt, Rng& rng) {
  Worst w;
  const Envelope& H = model.constants.H;
  std::size_t audited = 0;
  for (std::size_t s = 0; s < opt.samples; ++s) {
    Configuration yh = opt.sampler(rng);
    int L = opt.l_grid[s % opt.l_grid.size()];
    std::size_t pairs = 1 + rng.below(2);
    std::vector<Particle> ps(yh.particles().begin(), yh.particles().end());
    bool plus_charge = yh.charge() > 0;
    // New particles sit strictly beyond distance L behind the island.
    std::set<Site> extra;
    while (extra.size() < 2 * pairs) {
      Site off = static_cast<Site>(rng.between(1, 4 * static_cast<std::int64_t>(pairs) + 8));
      extra.insert(plus_charge ? yh.left() - L - off : yh.right() + L + off);
    }
    Sign sgn = Sign::plus;  // both cases start the added block with a plus
    for (Site p : extra) {
      ps.push_back({p, sgn});
      sgn = opposite(sgn);
    }
    Configuration y = Configuration::from_particles(std::move(ps));
    const std::size_t shift = plus_charge ? 2 * pairs : 0;
    const double bound = H(static_cast<double>(y.count()), L);
    ++audited;
    for (std::size_t i = 0; i < yh.count(); ++i) {
      const std::size_t j = i + shift;
      for (Sign as : {Sign::plus, Sign::minus}) {
        RwRates a = model.walk->rw_rates_as(yh, i, as);
        RwRates b = model.walk->rw_rates_as(y, j, as);
        double diff = std::abs(a.r - b.r) + std::abs(a.l - b.l) +
                      std::abs(model.branch->branch_rate_as(yh, i, as) -
                               model.branch->branch_rate_as(y, j, as));
        w.offer(bound - diff, describe(yh, i, "far perturbation at L=" + std::to_string(L) +
                                                  " changes rates by " + std::to_string(diff)));
      }
      if (model.long_range) {
        for (int l = 2; l <= model.long_range->max_range(); ++l) {
          double diff = std::abs(model.long_range->long_branch_rate(yh, i, l) -
                                 model.long_range->long_branch_rate(y, j, l));
          w.offer(bound - diff, describe(yh, i, "far perturbation changes b_l by " +
                                                    std::to_string(diff)));
        }
      }
    }
  }
  // Decay of the declared envelope.
  bool decays = true;
  for (double N = 1; N <= static_cast<double>(opt.sampler.max_count) + 4; N += 2) {
    double prev = H(N, 1);
    for (int e = 1; e <= 20; ++e) {
      double cur = H(N, std::ldexp(1.0, e));
      if (cur > prev) decays = false;
      prev = cur;
    }
    if (!(prev <= 1e-3 * H(N, 1)) && prev != 0.0) decays = false;
  }
  if (!decays) w.offer(-1.0, "declared H(N, L) does not decay in L");
  auto r = finish("A3", audited, w, true);
  r.details["envelope_decays"] = decays;
  r.details["l_grid"] = opt.l_grid;
  return r;
}

double a4_check(const ModelSpec& model, const Configuration& y, A4Variant variant,
                std::string* witness) {
  const std::size_t n = y.count();
  std::vector<PQView> pq(n);
  for (std::size_t i = 0; i < n; ++i) pq[i] = pq_view(model, y, y[i].position);
  double worst = kInf;
  auto offer = [&](double slack, const std::string& what) {
    if (slack < worst) {
      worst = slack;
      if (witness && slack < 0) *witness = to_string(y) + ": " + what;
    }
  };
  for (std::size_t a = 0; a + 1 < n; ++a) {
    const std::size_t b = a + 1;
    if (variant == A4Variant::b && !(y[a].sign == Sign::plus && y[b].sign == Sign::minus)) continue;
    if (pq[a].p == 0 || pq[a].q == 0 || pq[b].p == 0 || pq[b].q == 0) continue;
    double slack = (pq[a].p + pq[b].q) - (pq[a].q + pq[b].p);
    offer(slack, "interfaces at " + std::to_string(y[a].position) + " and " +
                     std::to_string(y[b].position) + " violate p_k + q_l >= q_k + p_l");
  }
  if (variant == A4Variant::b) {
    double pmin = kInf, pmax = -kInf, qmin = kInf, qmax = -kInf;
    for (const auto& v : pq) {
      if (v.p != 0) {
        pmin = std::min(pmin, v.p);
        pmax = std::max(pmax, v.p);
      }
      if (v.q != 0) {
        qmin = std::min(qmin, v.q);
        qmax = std::max(qmax, v.q);
      }
    }
    const PQView& ext = y.charge() > 0 ? pq[n - 1] : pq[0];
    double want_p = y.charge() > 0 ? pmin : pmax;
    double want_q = y.charge() > 0 ? qmax : qmin;
    if (ext.p != want_p || ext.q != want_q) {
      offer(-std::max(std::abs(ext.p - want_p), std::abs(ext.q - want_q)),
            "extremal interface rates are not the extreme values");
    }
  }
  return worst;
}

ValidationReport validate_A4(const ModelSpec& model, const AuditOptions& opt, Rng& rng,
                             A4Variant variant) {
  if (variant == A4Variant::either) {
    Rng copy = rng;
    auto ra = validate_A4(model, opt, rng, A4Variant::a);
    if (ra.pass) return ra;
    auto rb = validate_A4(model, opt, copy, A4Variant::b);
    rb.details["A4a_witness"] = ra.worst_witness.value_or("");
    return rb;
  }
  Worst w;
  for (std::size_t s = 0; s < opt.samples; ++s) {
    Configuration y = opt.sampler(rng);
    std::string what;
    double slack = a4_check(model, y, variant, &what);
    if (std::isfinite(slack)) w.offer(slack, what.empty() ? to_string(y) : what);
  }
  auto r = finish(variant == A4Variant::a ? "A4a" : "A4b", opt.samples, w, true);
  r.details["variant"] = variant == A4Variant::a ? "a" : "b";
  return r;
}

ValidationReport validate_A5(const ModelSpec& model, const AuditOptions& opt, Rng& rng) {
  if (!model.long_range) {
    ValidationReport r;
    r.assumption = "A5";
    r.details["note"] = "no long-range branching declared";
    return r;
  }
  Worst w;
  const auto& bt = model.constants.B_tilde;
  const int lmax = model.long_range->max_range();
  for (std::size_t s = 0; s < opt.samples; ++s) {
    Configuration y = s == 0 ? Configuration::singleton(0) : opt.sampler(rng);
    for (std::size_t i = 0; i < y.count(); ++i) {
      for (int l = 2; l <= lmax; ++l) {
        double b = model.long_range->long_branch_rate(y, i, l);
        w.offer(bt(l) - b, describe(y, i, "b_l exceeds B_tilde(l) at l=" + std::to_string(l)));
      }
    }
  }
  double weighted = 0.0;
  double d_sum = 0.0;
  for (int l = 2; l <= lmax; ++l) {
    weighted += double(l) * l * bt(l);
    d_sum += bt(l);
  }
  // Tail flag: dyadic blocks of l^2 B_tilde(l) must shrink.
  auto block = [&](int k) {
    double sum = 0.0;
    double lo = std::ldexp(1.0, k);
    double step = std::max(1.0, lo / 256);
    for (double l = lo; l < 2 * lo; l += step) sum += l * l * bt(l) * step;
    return sum;
  };
  double early = block(4);
  double late = block(20);
  bool tail_converges = late <= 1e-3 * early || late == 0.0;
  // Bounded nearest-neighbour branching.
  bool bounded = true;
  for (int n = 1; n <= model.constants.n_audit; n += 2) {
    if (model.constants.B_n(n) > model.constants.B_bar) bounded = false;
  }
  if (!bounded) w.offer(-1.0, "B_n exceeds the declared B_bar");
  if (!tail_converges) w.offer(-1.0, "sum of l^2 B_tilde(l) does not appear to converge");
  auto r = finish("A5", opt.samples, w, std::isfinite(weighted));
  r.details["weighted_sum"] = weighted;
  r.details["D"] = d_sum;
  r.details["tail_converges"] = tail_converges;
  r.details["B_n_bounded"] = bounded;
  return r;
}

std::vector<ValidationReport> validate_all(const ModelSpec& model, const AuditOptions& opt,
                                           std::uint64_t seed) {
  std::vector<ValidationReport> out;
  Rng r0 = Rng::for_replica(seed, 0), r1 = Rng::for_replica(seed, 1), r2 = Rng::for_replica(seed, 2),
      r3 = Rng::for_replica(seed, 3), r4 = Rng::for_replica(seed, 4), r5 = Rng::for_replica(seed, 5);
  out.push_back(validate_A0(model, opt, r0));
  out.push_back(validate_A1(model, opt, r1));
  out.push_back(validate_A2(model, opt, r2));
  out.push_back(validate_A3(model, opt, r3));
  out.push_back(validate_A4(model, opt, r4, model.constants.a4));
  out.push_back(validate_A5(model, opt, r5));
  return out;
}

}  // namespace dbarw
