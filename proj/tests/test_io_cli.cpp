#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "dbarw/catalog.hpp"
#include "dbarw/commands.hpp"
#include "dbarw/config.hpp"
#include "dbarw/io.hpp"
#include "helpers.hpp"

using namespace dbarw;
using nlohmann::json;
using th::cfg;
using th::code_of;
namespace fs = std::filesystem;

namespace {

json ref_config() {
  return json::parse(R"({
    "spec_version": 1,
    "model": {
      "alpha1": 1.0, "alpha2": 0.1,
      "walk": {"id": "const_symmetric", "params": {"rate": 0.25}},
      "branch": {"id": "const_branch", "params": {"beta": 1.0}},
      "constants": {"s_lower": 0.5, "d_bar": 1.0, "B_n": 2.0, "D_bar": 1.0, "B_bar": 2.0, "A4": "a"}
    },
    "initial": [[0, 1], [1, -1], [2, 1], [3, -1], [4, 1]],
    "run": {"mode": "events", "horizon": 5.0, "seed": 42, "replicas": 3, "K": 3.0, "samples": 50},
    "output": {"formats": ["csv", "json"]}
  })");
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("dbarw_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const json& j) {
  fs::create_directories(dir);
  auto p = dir / "config.json";
  write_text(p.string(), j.dump());
  return p.string();
}

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::string& command, const std::string& config, const fs::path& out,
        std::function<void(CliOptions&)> tweak = {}) {
  CliOptions o;
  o.command = command;
  o.config = config;
  o.out = out.string();
  if (tweak) tweak(o);
  std::ostringstream so, se;
  int c = run_command(o, so, se);
  return {c, so.str(), se.str()};
}

}  // namespace

TEST_CASE("config parsing") {
  auto c = parse_config(ref_config());
  CHECK(c.initial.count() == 5);
  CHECK(c.run.mode == RecordMode::events);
  CHECK(*c.run.seed == 42);
  CHECK(c.output.directory == "./out");
  CHECK(c.model.alpha2 == 0.1);
  CHECK(c.stop_rule().horizon == 5.0);

  auto no_seed = ref_config();
  no_seed["run"].erase("seed");
  CHECK(code_of([&] { parse_config(no_seed); }) == Errc::ConfigParse);
  auto unknown = ref_config();
  unknown["run"]["colour"] = 1;
  CHECK(code_of([&] { parse_config(unknown); }) == Errc::ConfigParse);
  auto bad_initial = ref_config();
  bad_initial["initial"] = json::parse("[[0, 1], [1, 1], [2, 1]]");
  CHECK(code_of([&] { parse_config(bad_initial); }) == Errc::ConfigParse);
  auto even = ref_config();
  even["initial"] = json::parse("[[0, 1], [1, -1]]");
  CHECK(code_of([&] { parse_config(even); }) == Errc::ConfigParse);
  auto version = ref_config();
  version.erase("spec_version");
  CHECK(code_of([&] { parse_config(version); }) == Errc::ConfigParse);
  auto family = ref_config();
  family["model"]["walk"]["id"] = "no_such_walk";
  CHECK(code_of([&] { parse_config(family); }) == Errc::UnknownFamily);
  auto param = ref_config();
  param["model"]["walk"]["params"]["rate"] = -1.0;
  CHECK(code_of([&] { parse_config(param); }) == Errc::InvalidParameter);
  CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == Errc::ConfigParse);

  CHECK(configuration_to_json(c.initial) == ref_config()["initial"]);
  CHECK(configuration_from_json(configuration_to_json(c.initial)) == c.initial);
}

TEST_CASE("number formatting keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  json j = {{"x", 0.1}, {"n", 3}, {"inf", std::numeric_limits<double>::infinity()}};
  auto text = dump_json(j);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  auto back = json::parse(text);
  CHECK(back["x"].get<double>() == 0.1);
  CHECK(back["inf"].is_null());
  CHECK(text.back() == '\n');
}

TEST_CASE("writers round trip through the loaders") {
  auto m = reference_model();
  auto y0 = cfg({{0, 1}, {1, -1}, {2, 1}});
  Rng rng(12);
  auto tr = simulate(m, y0, StopRule{10.0, std::nullopt, false}, rng, RecordMode::events, 12);
  REQUIRE(!tr.events.empty());
  auto csv = trajectory_csv(tr.events);
  CHECK(csv.rfind(kTrajectoryHeader, 0) == 0);
  CHECK(parse_trajectory_csv(csv, y0.width()) == tr.events);
  CHECK(replay(y0, parse_trajectory_csv(csv, y0.width())) == tr.final_state);
  CHECK(code_of([] { parse_trajectory_csv("time,kind\n1,2\n", 1); }) == Errc::ConfigParse);

  auto sj = json::parse(dump_json(summary_json(tr)));
  CHECK(summary_from_json(sj) == summarize_run(tr));

  Rng vr(1);
  AuditOptions ao;
  ao.samples = 30;
  auto rep = validate_A1(m, ao, vr);
  auto rj = json::parse(dump_json(report_json(rep)));
  auto rep2 = report_from_json(rj);
  CHECK(rep2.assumption == rep.assumption);
  CHECK(rep2.pass == rep.pass);
  CHECK(rep2.margin == rep.margin);
  CHECK(rep2.audited_samples == rep.audited_samples);
  CHECK(rep2.worst_witness == rep.worst_witness);

  Rng dr(2);
  auto drep = drift_audit(m, ConfigSampler{}, 20, dr);
  auto drep2 = drift_report_from_json(json::parse(dump_json(drift_report_json(drep))));
  CHECK(drep2.pass == drep.pass);
  REQUIRE(drep2.cases.size() == drep.cases.size());
  for (std::size_t k = 0; k < drep.cases.size(); ++k) {
    CHECK(drep2.cases[k].config == drep.cases[k].config);
    CHECK(drep2.cases[k].exact == drep.cases[k].exact);
    CHECK(drep2.cases[k].bound == drep.cases[k].bound);
  }

  Histogram h;
  h.add(1, 0.3);
  h.add(5, 0.1);
  auto rows = parse_histogram_csv(histogram_csv(h));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].first == 1);
  CHECK(rows[0].second == h.probabilities().at(1));
  CHECK(rows[1].second == h.probabilities().at(5));

  Rng qr(3);
  auto path = sample_Q(2, 3.0, 0.5, qr);
  CHECK(parse_dominator_csv(dominator_csv(path)) == path);
  Rng hr(3);
  auto hpath = sample_H(2, 1.0, 0.1, 2.0, 0.3, 2.0, hr);
  CHECK(parse_dominator_csv(dominator_csv(hpath)) == hpath);
}

TEST_CASE("subcommands write their files and exit 0") {
  auto dir = scratch("cli_ok");
  auto conf = write_config(dir, ref_config());
  for (const char* cmd : {"simulate", "ensemble", "validate", "drift-audit", "dominate"}) {
    CAPTURE(cmd);
    auto out = dir / cmd;
    auto r = run(cmd, conf, out);
    CAPTURE(r.err);
    CHECK(r.code == 0);
  }
  CHECK(fs::exists(dir / "simulate" / "trajectory.csv"));
  CHECK(fs::exists(dir / "simulate" / "summary.json"));
  CHECK(fs::exists(dir / "ensemble" / "ensemble.json"));
  CHECK(fs::exists(dir / "ensemble" / "trajectory_2.csv"));
  CHECK(fs::exists(dir / "validate" / "validation.json"));
  CHECK(fs::exists(dir / "validate" / "validate_A4a.json"));
  CHECK(fs::exists(dir / "drift-audit" / "drift_report.json"));
  CHECK(fs::exists(dir / "dominate" / "domination.json"));
  CHECK(fs::exists(dir / "dominate" / "dominator_path.csv"));

  // Emitted files re-parse with the library loaders.
  auto tr = parse_trajectory_csv(read_text((dir / "simulate" / "trajectory.csv").string()), 5);
  auto sum = summary_from_json(read_json((dir / "simulate" / "summary.json").string()));
  CHECK(sum.n_events == tr.size());
  CHECK(report_from_json(read_json((dir / "validate" / "validate_A1.json").string())).pass);
  CHECK(drift_report_from_json(read_json((dir / "drift-audit" / "drift_report.json").string())).pass);
  parse_dominator_csv(read_text((dir / "dominate" / "dominator_path.csv").string()));

  auto rc = ref_config();
  rc["run"]["horizon"] = 300.0;
  rc["run"]["mode"] = "summary";
  auto rconf = write_config(dir / "simulate", rc);
  auto r = run("recurrence", rconf, dir / "recurrence");
  CAPTURE(r.err);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "recurrence" / "recurrence.json"));
  auto rows = parse_histogram_csv(read_text((dir / "recurrence" / "width_histogram.csv").string()));
  double total = 0.0;
  for (auto [w, p] : rows) total += p;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("event-mode reruns are byte identical") {
  auto dir = scratch("cli_bytes");
  auto conf = write_config(dir, ref_config());
  REQUIRE(run("simulate", conf, dir / "a").code == 0);
  REQUIRE(run("simulate", conf, dir / "b").code == 0);
  CHECK(read_text((dir / "a" / "trajectory.csv").string()) ==
        read_text((dir / "b" / "trajectory.csv").string()));
  CHECK(read_text((dir / "a" / "summary.json").string()) ==
        read_text((dir / "b" / "summary.json").string()));
  REQUIRE(run("ensemble", conf, dir / "c", [](CliOptions& o) { o.jobs = 3; }).code == 0);
  REQUIRE(run("ensemble", conf, dir / "d", [](CliOptions& o) { o.jobs = 1; }).code == 0);
  CHECK(read_text((dir / "c" / "ensemble.json").string()) == read_text((dir / "d" / "ensemble.json").string()));
  CHECK(read_text((dir / "c" / "trajectory_1.csv").string()) ==
        read_text((dir / "d" / "trajectory_1.csv").string()));
  // The seed flag changes the stream.
  REQUIRE(run("simulate", conf, dir / "e", [](CliOptions& o) { o.seed = 7; }).code == 0);
  CHECK(read_text((dir / "a" / "trajectory.csv").string()) !=
        read_text((dir / "e" / "trajectory.csv").string()));
}

TEST_CASE("exit codes") {
  auto dir = scratch("cli_codes");
  auto conf = write_config(dir, ref_config());
  CHECK(run("validate", conf, dir / "v", [](CliOptions& o) { o.samples = 0; }).code == exit_code::config_parse);
  CHECK(run("simulate", (dir / "missing.json").string(), dir / "m").code == exit_code::config_parse);
  CHECK(run("bogus", conf, dir / "x").code != exit_code::ok);

  auto noseed = ref_config();
  noseed["run"].erase("seed");
  auto ns = write_config(dir / "v", noseed);
  CHECK(run("simulate", ns, dir / "ns").code == exit_code::config_parse);
  CHECK(run("simulate", ns, dir / "ns", [](CliOptions& o) { o.seed = 5; }).code == exit_code::ok);

  auto weak = ref_config();
  weak["model"]["alpha2"] = 0.5;
  weak["run"]["mode"] = "summary";
  fs::create_directories(dir / "w");
  auto wc = write_config(dir / "w", weak);
  auto r = run("recurrence", wc, dir / "w" / "out");
  CHECK(r.code == exit_code::model_invalid);
  CHECK(r.err.find("alpha1*s_lower > 2*alpha2*d_bar") != std::string::npos);
  CHECK(run("drift-audit", wc, dir / "w" / "out").code == exit_code::model_invalid);

  // From a singleton K Q = 2 sits below the growth envelope 2.4.
  auto single = ref_config();
  single["initial"] = json::parse("[[0, 1]]");
  auto sc = write_config(dir / "k1", single);
  auto d = run("dominate", sc, dir / "k1" / "out", [](CliOptions& o) { o.K = 1.0; });
  CHECK(d.code == exit_code::domination);
  CHECK(run("dominate", sc, dir / "k3" / "out").code == exit_code::ok);

  auto budget = ref_config();
  budget["run"]["horizon"] = 1e9;
  budget["run"]["event_budget"] = 1000;
  fs::create_directories(dir / "b");
  CHECK(run("simulate", write_config(dir / "b", budget), dir / "b" / "out").code == exit_code::event_budget);

  auto rep = ref_config();
  rep["model"]["walk"] = json::parse(
      R"({"id": "dist_gap_rank", "params": {"g_gap": "power:1,1", "g_rank": "power:0.4,1", "scale": 0.5}})");
  rep["model"]["alpha2"] = 0.05;
  rep["model"]["constants"]["s_lower"] = 0.2;
  rep["model"]["constants"]["H"] = json::parse(R"({"amp": 1.0, "l_power": 1.0})");
  rep["run"]["samples"] = 200;
  fs::create_directories(dir / "r");
  CHECK(run("validate", write_config(dir / "r", rep), dir / "r" / "out").code == exit_code::check_failed);

  CHECK(exit_code_for(Errc::ConfigParse) == 2);
  CHECK(exit_code_for(Errc::UnknownFamily) == 3);
  CHECK(exit_code_for(Errc::InvalidParameter) == 3);
  CHECK(exit_code_for(Errc::ModelInvalid) == 3);
  CHECK(exit_code_for(Errc::ConstantsInvalid) == 3);
  CHECK(exit_code_for(Errc::EventBudgetExceeded) == 4);
  CHECK(exit_code_for(Errc::DominationViolated) == 5);
  CHECK(exit_code_for(Errc::Overflow) == 6);
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  std::atomic<int> done{0};
  parallel_for(20, 4, [&](std::size_t) { ++done; });
  CHECK(done == 20);
  try {
    parallel_for(10, 3, [](std::size_t i) {
      if (i == 7 || i == 4) throw std::runtime_error("fail " + std::to_string(i));
    });
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "fail 4");
  }
}
