#include "dbarw/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "dbarw/dominators.hpp"

namespace dbarw {

std::string_view kind_name(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::rw_left: return "rw_left";
    case TransitionKind::rw_right: return "rw_right";
    case TransitionKind::branch: return "branch";
    case TransitionKind::long_branch: return "long_branch";
  }
  return "?";
}

TransitionKind parse_kind(std::string_view name) {
  if (name == "rw_left") return TransitionKind::rw_left;
  if (name == "rw_right") return TransitionKind::rw_right;
  if (name == "branch") return TransitionKind::branch;
  if (name == "long_branch") return TransitionKind::long_branch;
  throw Error(Errc::ConfigParse, "unknown event kind '" + std::string(name) + "'");
}

Configuration apply_transition(const Configuration& y, TransitionKind kind, Site site, int range) {
  switch (kind) {
    case TransitionKind::rw_left: return apply_rw(y, site, Direction::left);
    case TransitionKind::rw_right: return apply_rw(y, site, Direction::right);
    case TransitionKind::branch: return apply_branch(y, site);
    case TransitionKind::long_branch: return apply_long_branch(y, site, range);
  }
  throw Error(Errc::InvalidRange, "unknown transition kind");
}

std::vector<Transition> enumerate_transitions(const ModelSpec& model, const Configuration& y,
                                              bool with_successors) {
  std::vector<Transition> out;
  out.reserve(y.count() * (3 + (model.has_long_range() ? model.max_range() - 1 : 0)));
  auto push = [&](TransitionKind kind, Site site, int range, double rate) {
    if (!(rate > 0.0)) return;
    Transition t{kind, site, range, rate, std::nullopt};
    if (with_successors) t.successor = apply_transition(y, kind, site, range);
    out.push_back(std::move(t));
  };
  for (std::size_t i = 0; i < y.count(); ++i) {
    Site site = y[i].position;
    RwRates rr = model.walk ? model.walk->rw_rates(y, i) : RwRates{};
    push(TransitionKind::rw_left, site, 1, model.alpha1 * rr.l);
    push(TransitionKind::rw_right, site, 1, model.alpha1 * rr.r);
    double b = model.branch ? model.branch->branch_rate(y, i) : 0.0;
    push(TransitionKind::branch, site, 1, model.alpha2 * b);
    if (model.long_range) {
      for (int l = 2; l <= model.long_range->max_range(); ++l) {
        if (!careful_condition(y, site, l)) break;  // a larger l only adds interior
        push(TransitionKind::long_branch, site, l, model.long_range->long_branch_rate(y, i, l));
      }
    }
  }
  return out;
}

double total_rate(const std::vector<Transition>& ts) noexcept {
  double s = 0.0;
  for (const auto& t : ts) s += t.rate;
  return s;
}

double width_growth_rate(const ModelSpec& model, const Configuration& y) {
  double g = 0.0;
  for (const auto& t : enumerate_transitions(model, y, true)) {
    if (t.successor->width() > y.width()) g += t.rate;
  }
  return g;
}

double envelope_rate(const ModelSpec& model, const Configuration& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.count(); ++i) {
    for (Sign as : {Sign::plus, Sign::minus}) {
      if (model.walk) {
        RwRates rr = model.walk->rw_rates_as(y, i, as);
        s += model.alpha1 * (rr.r + rr.l);
      }
      if (model.branch) s += model.alpha2 * model.branch->branch_rate_as(y, i, as);
    }
  }
  return s;
}

namespace {

std::size_t pick(const std::vector<Transition>& ts, double target) {
  double acc = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    acc += ts[k].rate;
    if (target < acc) return k;
  }
  // Rounding can leave target at the very top; take the last transition.
  return ts.size() - 1;
}

Event make_event(double time, const Transition& t, const Configuration& pre,
                 const Configuration& post) {
  Event e;
  e.time = time;
  e.kind = t.kind;
  e.site = t.site;
  e.range = t.range;
  e.pre_count = pre.count();
  e.post_count = post.count();
  e.pre_width = pre.width();
  e.post_width = post.width();
  e.post_fcd = f_cd(post);
  e.charge = post.charge();
  return e;
}

void check_conservation(const Configuration& pre, const Configuration& post) {
  // Configuration construction already guarantees oddness and alternation.
  if (post.charge() != pre.charge()) {
    throw Error(Errc::NonAlternating, "charge changed from " + std::to_string(pre.charge()) +
                                          " to " + std::to_string(post.charge()));
  }
  auto a = static_cast<std::int64_t>(pre.count());
  auto b = static_cast<std::int64_t>(post.count());
  if (b != a && b != a - 2 && b != a + 2) {
    throw Error(Errc::EvenCount, "particle count jumped from " + std::to_string(a) + " to " +
                                     std::to_string(b));
  }
}

}  // namespace

StepResult step(const Configuration& y, const ModelSpec& model, Rng& rng) {
  auto ts = enumerate_transitions(model, y, false);
  double total = total_rate(ts);
  if (!(total > 0.0)) throw Error(Errc::NoTransitions, "total rate is zero at " + to_string(y));
  double dt = rng.exponential(total);
  const Transition& t = ts[pick(ts, rng.uniform() * total)];
  Configuration next = apply_transition(y, t.kind, t.site, t.range);
  check_conservation(y, next);
  return {dt, make_event(dt, t, y, next), std::move(next)};
}

std::uint64_t default_event_budget() {
  if (const char* env = std::getenv("DBARW_EVENT_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 10'000'000ULL;
}

Trajectory simulate(const ModelSpec& model, const Configuration& initial, const StopRule& stop,
                    Rng& rng, RecordMode mode, std::uint64_t seed, PathObserver* observer,
                    std::uint64_t event_budget) {
  if (!stop.horizon && !stop.max_events && !stop.until_singleton) {
    throw Error(Errc::ConfigParse, "stop rule needs a horizon, an event limit or singleton stop");
  }
  Trajectory tr;
  tr.initial = initial;
  tr.seed = seed;
  tr.horizon = stop.horizon.value_or(0.0);
  tr.max_width = initial.width();

  Configuration y = initial;
  double t = 0.0;
  double count_integral = 0.0;
  auto hold = [&](double t1) {
    count_integral += static_cast<double>(y.count()) * (t1 - t);
    if (observer && t1 > t) observer->hold(y, t, t1);
  };

  if (stop.until_singleton && y.is_singleton()) tr.hit_singleton_time = 0.0;
  while (!(stop.until_singleton && tr.hit_singleton_time)) {
    if (stop.max_events && tr.n_events >= *stop.max_events) break;
    auto ts = enumerate_transitions(model, y, false);
    double total = total_rate(ts);
    if (!(total > 0.0)) {
      if (!stop.horizon) {
        throw Error(Errc::NoTransitions, "total rate is zero at " + to_string(y));
      }
      hold(*stop.horizon);
      t = *stop.horizon;
      break;
    }
    double dt = rng.exponential(total);
    if (stop.horizon && t + dt > *stop.horizon) {
      hold(*stop.horizon);
      t = *stop.horizon;
      break;
    }
    if (tr.n_events >= event_budget) {
      throw Error(Errc::EventBudgetExceeded,
                  "event budget " + std::to_string(event_budget) + " exhausted at time " +
                      std::to_string(t));
    }
    const Transition& chosen = ts[pick(ts, rng.uniform() * total)];
    Configuration next = apply_transition(y, chosen.kind, chosen.site, chosen.range);
    check_conservation(y, next);
    hold(t + dt);
    t += dt;
    Event e = make_event(t, chosen, y, next);
    y = std::move(next);
    ++tr.n_events;
    tr.max_width = std::max(tr.max_width, y.width());
    if (observer) observer->event(e, y);
    if (mode == RecordMode::events) tr.events.push_back(e);
    if (y.is_singleton() && !tr.hit_singleton_time) tr.hit_singleton_time = t;
  }
  tr.end_time = t;
  tr.final_state = y;
  tr.time_avg_count = t > 0.0 ? count_integral / t : static_cast<double>(y.count());
  return tr;
}

Configuration replay(const Configuration& initial, const std::vector<Event>& events) {
  Configuration y = initial;
  double last = 0.0;
  std::size_t k = 0;
  for (const auto& e : events) {
    auto fail = [&](const std::string& what) {
      throw Error(Errc::ModelInvalid, "replay mismatch at event " + std::to_string(k) + ": " + what);
    };
    if (k > 0 && !(e.time > last)) fail("times not increasing");
    if (e.pre_count != y.count()) fail("pre_count");
    Configuration next = apply_transition(y, e.kind, e.site, e.range);
    if (e.post_count != next.count()) fail("post_count");
    if (e.post_width != next.width()) fail("post_width");
    if (e.post_fcd != f_cd(next)) fail("post_fcd");
    if (e.charge != next.charge()) fail("charge");
    y = std::move(next);
    last = e.time;
    ++k;
  }
  return y;
}

namespace {

std::string describe_at(double t, const std::string& what) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "t=%.17g: ", t);
  return buf + what;
}

void require_nearest_neighbour(const ModelSpec& model) {
  if (model.has_long_range()) {
    throw Error(Errc::ModelInvalid,
                "coupled width/step processes need a nearest-neighbour model; use sample_H for "
                "long-range models");
  }
}

}  // namespace

CoupledWidthResult simulate_coupled_width(const ModelSpec& model, const Configuration& initial,
                                          double K, double horizon, Rng& rng,
                                          const CouplingOptions& opt) {
  require_nearest_neighbour(model);
  CoupledWidthResult res;
  Configuration y = initial;
  std::int64_t q = initial.width() + 1;
  double t = 0.0;
  res.max_width = y.width();
  auto violate = [&](const std::string& what) {
    if (res.violations++ == 0) res.first_violation = describe_at(t, what);
  };
  auto record = [&] {
    if (opt.record_path) res.path.push_back({t, y.width(), q});
  };
  record();
  std::uint64_t budget = opt.event_budget;
  while (true) {
    auto ts = enumerate_transitions(model, y, true);
    double R = total_rate(ts);
    double g = 0.0;
    for (const auto& tr : ts)
      if (tr.successor->width() > y.width()) g += tr.rate;
    double env = 2 * model.alpha1 +
                 2 * model.alpha2 * model.constants.B_n(static_cast<double>(y.count()));
    double kq = K * static_cast<double>(q);
    if (g > env * (1 + 1e-12)) violate("width growth rate exceeds 2a1+2a2*B_|y|");
    if (env > kq) violate("envelope exceeds K*Q with Q=" + std::to_string(q));
    if (static_cast<std::uint64_t>(q) >= opt.exact_cap) res.saturated = true;
    double q_only = res.saturated ? 0.0 : std::max(kq - g, 0.0);
    double total = R + q_only;
    if (!(total > 0.0)) break;
    double dt = rng.exponential(total);
    if (t + dt > horizon) break;
    t += dt;
    double u = rng.uniform() * total;
    if (u < R) {
      if (res.y_events >= budget) {
        throw Error(Errc::EventBudgetExceeded, "coupled width run exceeded its event budget");
      }
      const Transition& tr = ts[pick(ts, u)];
      Configuration next = *tr.successor;
      check_conservation(y, next);
      if (next.width() > y.width()) ++q;
      y = std::move(next);
      ++res.y_events;
    } else {
      ++q;
      ++res.q_births_exact;
    }
    res.max_width = std::max(res.max_width, y.width());
    if (y.width() > q) violate("W=" + std::to_string(y.width()) + " > Q=" + std::to_string(q));
    record();
  }
  res.final_width = y.width();
  res.final_q = q;
  return res;
}

CoupledStepsResult simulate_coupled_steps(const ModelSpec& model, const Configuration& initial,
                                          double horizon, Rng& rng, const CouplingOptions& opt) {
  require_nearest_neighbour(model);
  CoupledStepsResult res;
  const auto n0 = static_cast<std::int64_t>(initial.count());
  BOfTable bof(model.constants.B_n);
  auto lambda = [&](std::uint64_t k) {
    auto n = static_cast<double>(n0 + 2 * static_cast<std::int64_t>(k));
    return model.alpha1 * n + model.alpha2 * bof(static_cast<std::int64_t>(n));
  };
  Configuration y = initial;
  std::uint64_t n = 0;  // steps of Y
  std::uint64_t j = 0;  // completed jumps of the dominating counter
  double t = 0.0;
  auto violate = [&](const std::string& what) {
    if (res.violations++ == 0) res.first_violation = describe_at(t, what);
  };
  auto record = [&] {
    if (opt.record_path) {
      res.path.push_back({t, static_cast<std::int64_t>(n), n0 + 1 + static_cast<std::int64_t>(j)});
    }
  };
  record();
  while (true) {
    auto ts = enumerate_transitions(model, y, false);
    double R = total_rate(ts);
    double lam_n = lambda(n + 1);
    double lam_j = lambda(j + 1);
    if (R > lam_n * (1 + 1e-12)) violate("total rate exceeds lambda_{N+1}");
    if (R > lam_j * (1 + 1e-12)) violate("total rate exceeds the dominating rate");
    if (j >= opt.exact_cap) res.saturated = true;
    double only = res.saturated ? 0.0 : std::max(lam_j - R, 0.0);
    double total = R + only;
    if (!(total > 0.0)) break;
    double dt = rng.exponential(total);
    if (t + dt > horizon) break;
    t += dt;
    double u = rng.uniform() * total;
    if (u < R) {
      if (res.y_events >= opt.event_budget) {
        throw Error(Errc::EventBudgetExceeded, "coupled step run exceeded its event budget");
      }
      const Transition& tr = ts[pick(ts, u)];
      Configuration next = apply_transition(y, tr.kind, tr.site, tr.range);
      check_conservation(y, next);
      y = std::move(next);
      ++n;
      ++j;
      ++res.y_events;
    } else {
      ++j;
    }
    if (n > j + 1 + static_cast<std::uint64_t>(n0)) violate("N exceeds the dominating count");
    record();
  }
  res.n_tilde = static_cast<std::uint64_t>(n0) + 1 + j;
  return res;
}

}  // namespace dbarw
