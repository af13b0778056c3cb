#include "dbarw/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include "dbarw/config.hpp"
#include "dbarw/diagnostics.hpp"
#include "dbarw/dominators.hpp"
#include "dbarw/engine.hpp"
#include "dbarw/io.hpp"
#include "dbarw/validators.hpp"

namespace dbarw {

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::ConfigParse: return exit_code::config_parse;
    case Errc::ModelInvalid:
    case Errc::UnknownFamily:
    case Errc::InvalidParameter:
    case Errc::ConstantsInvalid: return exit_code::model_invalid;
    case Errc::EventBudgetExceeded: return exit_code::event_budget;
    case Errc::DominationViolated: return exit_code::domination;
    default: return exit_code::other;
  }
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

struct Context {
  RunConfig rc;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::ostream& out;

  std::string path(const std::string& name) const { return (out_dir / name).string(); }
};

Context prepare(const CliOptions& opt, std::ostream& out) {
  nlohmann::json raw = read_json(opt.config);
  // A command-line seed also satisfies the events-mode seed requirement.
  if (opt.seed && raw.is_object()) {
    if (!raw.contains("run")) raw["run"] = nlohmann::json::object();
    if (raw["run"].is_object()) raw["run"]["seed"] = *opt.seed;
  }
  Context ctx{parse_config(raw), {}, 0, std::max(1u, opt.jobs), out};
  auto& run = ctx.rc.run;
  if (opt.seed) run.seed = opt.seed;
  if (opt.samples) {
    if (*opt.samples < 1) throw Error(Errc::ConfigParse, "--samples must be >= 1");
    run.samples = static_cast<std::size_t>(*opt.samples);
  }
  if (opt.width) {
    if (*opt.width < 1) throw Error(Errc::ConfigParse, "--width must be >= 1");
    run.width = *opt.width;
  }
  if (opt.K) run.K = *opt.K;
  ctx.seed = run.seed.value_or(0);
  ctx.out_dir = opt.out ? *opt.out : ctx.rc.output.directory;
  std::filesystem::create_directories(ctx.out_dir);
  return ctx;
}

double require_horizon(const RunConfig& rc, const char* command) {
  if (!rc.run.horizon) {
    throw Error(Errc::ConfigParse, std::string("run.horizon is required for ") + command);
  }
  return *rc.run.horizon;
}

int cmd_simulate(Context& ctx) {
  const auto& rc = ctx.rc;
  Rng rng = Rng::for_replica(ctx.seed, 0);
  Trajectory tr = simulate(rc.model, rc.initial, rc.stop_rule(), rng, rc.run.mode, ctx.seed,
                           nullptr, rc.event_budget());
  if (rc.run.mode == RecordMode::events && rc.output.wants("csv")) {
    write_text(ctx.path("trajectory.csv"), trajectory_csv(tr.events));
  }
  if (rc.output.wants("json")) write_text(ctx.path("summary.json"), dump_json(summary_json(tr)));
  ctx.out << "simulate: " << tr.n_events << " events, final count " << tr.final_state.count()
          << ", max width " << tr.max_width << "\n";
  return exit_code::ok;
}

int cmd_ensemble(Context& ctx) {
  const auto& rc = ctx.rc;
  const auto n = static_cast<std::size_t>(rc.run.replicas);
  std::vector<Trajectory> runs(n);
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    Rng rng = Rng::for_replica(ctx.seed, i);
    runs[i] = simulate(rc.model, rc.initial, rc.stop_rule(), rng, rc.run.mode, ctx.seed ^ i,
                       nullptr, rc.event_budget());
  });
  nlohmann::json j;
  j["seed"] = ctx.seed;
  j["replicas"] = n;
  nlohmann::json list = nlohmann::json::array();
  double sum = 0, sum2 = 0, width = 0, count = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    list.push_back(summary_json(runs[i]));
    sum += runs[i].time_avg_count;
    sum2 += runs[i].time_avg_count * runs[i].time_avg_count;
    width += static_cast<double>(runs[i].max_width);
    count += static_cast<double>(runs[i].final_state.count());
    if (runs[i].hit_singleton_time) ++hits;
    if (rc.run.mode == RecordMode::events && rc.output.wants("csv")) {
      write_text(ctx.path("trajectory_" + std::to_string(i) + ".csv"),
                 trajectory_csv(runs[i].events));
    }
  }
  auto dn = static_cast<double>(n);
  double mean = sum / dn;
  double se = n > 1 ? std::sqrt(std::max(0.0, (sum2 - dn * mean * mean) / (dn - 1)) / dn) : 0.0;
  j["mean_time_avg_count"] = mean;
  j["se_time_avg_count"] = se;
  j["mean_max_width"] = width / dn;
  j["mean_final_count"] = count / dn;
  j["singleton_hits"] = hits;
  j["runs"] = std::move(list);
  write_text(ctx.path("ensemble.json"), dump_json(j));
  ctx.out << "ensemble: " << n << " replicas, mean time-average count " << format_double(mean)
          << " +- " << format_double(se) << "\n";
  return exit_code::ok;
}

AuditOptions audit_options(const RunConfig& rc) {
  AuditOptions a;
  a.samples = rc.run.samples;
  a.sampler.max_width = rc.run.width;
  a.sampler.max_count = rc.run.max_count;
  return a;
}

int cmd_validate(Context& ctx) {
  auto reports = validate_all(ctx.rc.model, audit_options(ctx.rc), ctx.seed);
  bool all = true;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    write_text(ctx.path("validate_" + r.assumption + ".json"), dump_json(report_json(r)));
    arr.push_back(report_json(r));
    all = all && r.pass;
    ctx.out << r.assumption << ": " << (r.pass ? "pass" : "FAIL") << " (margin "
            << format_double(r.margin) << ")";
    if (!r.pass && r.worst_witness) ctx.out << " witness " << *r.worst_witness;
    ctx.out << "\n";
  }
  write_text(ctx.path("validation.json"), dump_json(arr));
  return all ? exit_code::ok : exit_code::check_failed;
}

int cmd_drift_audit(Context& ctx) {
  const auto& rc = ctx.rc;
  Rng rng(ctx.seed);
  ConfigSampler s;
  s.max_width = rc.run.width;
  s.max_count = rc.run.max_count;
  DriftReport rep = drift_audit(rc.model, s, rc.run.samples, rng, {rc.initial});
  write_text(ctx.path("drift_report.json"), dump_json(drift_report_json(rep)));
  ctx.out << "drift-audit: " << rep.cases.size() << " cases, " << rep.violations()
          << " violations, pass=" << (rep.pass ? "true" : "false") << "\n";
  return rep.pass ? exit_code::ok : exit_code::check_failed;
}

int cmd_recurrence(Context& ctx) {
  const auto& rc = ctx.rc;
  require_recurrence_constants(rc.model);
  RecurrenceOptions ro;
  ro.horizon = require_horizon(rc, "recurrence");
  ro.burn_in = rc.run.burn_in;
  ro.windows = rc.run.windows;
  ro.event_budget = rc.event_budget();
  if (!rc.run.grid.empty()) {
    ro.grid = rc.run.grid;
  } else {
    ro.grid.clear();
    for (double g = 1e2; g <= ro.horizon; g *= 10) ro.grid.push_back(g);
  }
  const auto n = static_cast<std::size_t>(rc.run.replicas);
  std::vector<RecurrenceStats> runs(n);
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    Rng rng = Rng::for_replica(ctx.seed, i);
    runs[i] = recurrence_study(rc.model, rc.initial, ro, rng);
  });
  RecurrenceSummary s = summarize(runs);
  nlohmann::json j = recurrence_json(s);
  j["seed"] = ctx.seed;
  j["horizon"] = ro.horizon;
  j["burn_in"] = ro.burn_in;
  j["C_over_c"] = rc.model.drift_C() / rc.model.drift_c();
  write_text(ctx.path("recurrence.json"), dump_json(j));
  write_text(ctx.path("width_histogram.csv"), histogram_csv(s.width_histogram));
  ctx.out << "recurrence: " << s.returned << "/" << s.replicas
          << " replicas reached the singleton; time-average count "
          << format_double(s.mean_time_avg_count) << " +- " << format_double(s.se_time_avg_count)
          << "\n";
  return exit_code::ok;
}

int cmd_dominate(Context& ctx) {
  const auto& rc = ctx.rc;
  const auto& model = rc.model;
  double horizon = require_horizon(rc, "dominate");
  const auto n = static_cast<std::size_t>(rc.run.replicas);
  DominatorParams dp =
      make_dominator_params(model, rc.initial.width(), static_cast<std::int64_t>(rc.initial.count()),
                            rc.run.K);
  dp.h_factor = rc.run.h_factor;
  nlohmann::json j;
  j["seed"] = ctx.seed;
  j["replicas"] = n;
  j["horizon"] = horizon;
  j["K"] = dp.K;
  j["K_threshold"] = dp.K_min;
  j["N0"] = dp.N0;

  if (model.has_long_range()) {
    std::vector<DominatorPath> paths(n);
    parallel_for(n, ctx.jobs, [&](std::size_t i) {
      Rng rng = Rng::for_replica(ctx.seed, i);
      paths[i] = sample_H(dp.w0, dp.alpha1, dp.alpha2, dp.B_bar, dp.D, horizon, rng, dp.h_factor);
    });
    double m1 = 0, m2 = 0;
    for (const auto& p : paths) {
      auto v = static_cast<double>(p.back().value);
      m1 += v;
      m2 += v * v;
    }
    j["process"] = "H";
    j["D"] = dp.D;
    j["mean_final"] = m1 / static_cast<double>(n);
    j["second_moment_final"] = m2 / static_cast<double>(n);
    write_text(ctx.path("domination.json"), dump_json(j));
    if (rc.output.wants("csv") && !paths.empty()) {
      write_text(ctx.path("dominator_path.csv"), dominator_csv(paths.front()));
    }
    ctx.out << "dominate: sampled " << n << " long-range width chains, mean H(T) "
            << format_double(m1 / static_cast<double>(n)) << "\n";
    return exit_code::ok;
  }

  CouplingOptions co;
  co.exact_cap = rc.run.exact_cap;
  co.event_budget = rc.event_budget();
  std::vector<CoupledWidthResult> widths(n);
  std::vector<CoupledStepsResult> steps(n);
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    Rng rng = Rng::for_replica(ctx.seed, i);
    widths[i] = simulate_coupled_width(model, rc.initial, dp.K, horizon, rng, co);
    steps[i] = simulate_coupled_steps(model, rc.initial, horizon, rng, co);
  });
  std::uint64_t wv = 0, sv = 0;
  std::string first;
  std::size_t saturated = 0;
  for (std::size_t i = 0; i < n; ++i) {
    wv += widths[i].violations;
    sv += steps[i].violations;
    if (first.empty() && !widths[i].first_violation.empty()) {
      first = "replica " + std::to_string(i) + " width: " + widths[i].first_violation;
    }
    if (first.empty() && !steps[i].first_violation.empty()) {
      first = "replica " + std::to_string(i) + " steps: " + steps[i].first_violation;
    }
    if (widths[i].saturated || steps[i].saturated) ++saturated;
  }
  j["process"] = "Q";
  j["width_violations"] = wv;
  j["step_violations"] = sv;
  j["saturated_runs"] = saturated;
  if (!first.empty()) j["first_violation"] = first;
  write_text(ctx.path("domination.json"), dump_json(j));
  if (rc.output.wants("csv")) {
    Rng rng = Rng::for_replica(ctx.seed, 0);
    write_text(ctx.path("dominator_path.csv"),
               dominator_csv(sample_Q(dp.w0, dp.K, std::min(horizon, 2.0), rng)));
  }
  if (wv + sv > 0) {
    throw Error(Errc::DominationViolated, std::to_string(wv) + " width and " + std::to_string(sv) +
                                              " step violations; first at " + first);
  }
  ctx.out << "dominate: " << n << " coupled runs, zero violations (K=" << format_double(dp.K)
          << ", threshold " << format_double(dp.K_min) << ")\n";
  return exit_code::ok;
}

}  // namespace

int run_command(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    Context ctx = prepare(opt, out);
    if (opt.command == "simulate") return cmd_simulate(ctx);
    if (opt.command == "ensemble") return cmd_ensemble(ctx);
    if (opt.command == "validate") return cmd_validate(ctx);
    if (opt.command == "drift-audit") return cmd_drift_audit(ctx);
    if (opt.command == "recurrence") return cmd_recurrence(ctx);
    if (opt.command == "dominate") return cmd_dominate(ctx);
    err << "unknown command '" << opt.command << "'\n";
    return exit_code::other;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::other;
  }
}

}  // namespace dbarw
