#include <doctest.h>

#include <cmath>
#include <string>

#include "dbarw/catalog.hpp"
#include "dbarw/diagnostics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dbarw;
using th::cfg;
using th::code_of;

namespace {

double generator_oracle(const ModelSpec& m, const Configuration& y) {
  double f0 = static_cast<double>(oracle::fcd_pairs(y));
  double s = 0.0;
  for (const auto& t : oracle::brute_transitions(m, y))
    s += t.rate * (static_cast<double>(oracle::fcd_pairs(t.successor)) - f0);
  return s;
}

}  // namespace

TEST_CASE("generator values on small configurations") {
  auto m = reference_model();
  auto one = Configuration::singleton(0);
  auto three = cfg({{0, 1}, {1, -1}, {2, 1}});
  CHECK(generator_fcd_exact(m, one) == doctest::Approx(0.1));
  CHECK(generator_fcd_exact(m, three) == doctest::Approx(-0.4));
  CHECK(flip_drift_closed_form(m, one) == doctest::Approx(0.0));
  CHECK(flip_drift_closed_form(m, three) == doctest::Approx(-0.5));
  CHECK(excl_drift_closed_form(m, three) == doctest::Approx(0.1));
  auto parts = generator_fcd_parts(m, three);
  CHECK(parts.rw == doctest::Approx(-0.5));
  CHECK(parts.branch == doctest::Approx(0.1));
  CHECK(parts.long_range == 0.0);
  auto off = m;
  off.alpha1 = off.alpha2 = 0.0;
  CHECK(generator_fcd_exact(off, three) == 0.0);

  auto d1 = drift_case(m, one);
  CHECK(d1.bound == doctest::Approx(0.35));
  CHECK(d1.ok);
  auto d3 = drift_case(m, three);
  CHECK(d3.bound == doctest::Approx(0.05));
  CHECK(d3.ok);
}

TEST_CASE("closed forms agree with the enumerated generator") {
  std::vector<ModelSpec> models{reference_model()};
  auto attract = reference_model();
  attract.walk = build_walk("dist_attract_mid", nlohmann::json::object());
  attract.branch = build_branch("range_sum", nlohmann::json::object());
  models.push_back(attract);
  auto drift = reference_model();
  drift.walk = build_walk("rank_g_h", {{"g", 0.5}, {"h", 0.5}});
  models.push_back(drift);
  Rng rng(6);
  ConfigSampler s;
  for (const auto& m : models) {
    for (int k = 0; k < 150; ++k) {
      auto y = s(rng);
      double exact = generator_fcd_exact(m, y);
      REQUIRE(closed_form_match(exact, generator_oracle(m, y)));
      double cf = m.alpha1 * flip_drift_closed_form(m, y) + excl_drift_closed_form(m, y);
      CAPTURE(to_string(y));
      REQUIRE(closed_form_match(exact, cf));
    }
  }
  auto lr = th::long_range_model();
  s.max_width = 24;
  for (int k = 0; k < 150; ++k) {
    auto y = s(rng);
    double exact = generator_fcd_exact(lr, y);
    REQUIRE(closed_form_match(exact, generator_oracle(lr, y)));
    double cf = lr.alpha1 * flip_drift_closed_form(lr, y) + excl_drift_closed_form(lr, y) +
                long_range_drift_closed_form(lr, y);
    REQUIRE(closed_form_match(exact, cf));
  }
  // A long-range branch of a singleton by l adds l^2 to f_cd.
  CHECK(f_cd(apply_long_branch(Configuration::singleton(0), 0, 2)) == 4);
}

TEST_CASE("closed-form tolerance") {
  CHECK(closed_form_match(1.0, 1.0 + 5e-10));
  CHECK_FALSE(closed_form_match(1.0, 1.0 + 5e-9));
  CHECK(closed_form_match(0.0, 5e-10));
  CHECK(closed_form_match(1e6, 1e6 * (1 + 5e-10)));
}

TEST_CASE("drift audit") {
  auto m = reference_model();
  Rng rng(4);
  auto rep = drift_audit(m, ConfigSampler{}, 200, rng, {Configuration::singleton(0)});
  CHECK(rep.pass);
  CHECK(rep.violations() == 0);
  CHECK(rep.cases.size() == 201);
  CHECK(rep.C == doctest::Approx(0.5));
  CHECK(rep.c == doctest::Approx(0.15));
  CHECK_FALSE(rep.long_range);
  for (const auto& c : rep.cases) REQUIRE(c.exact <= c.bound + kDriftSlack);

  auto weak = m;
  weak.alpha2 = 0.5;
  Rng rng2(4);
  try {
    drift_audit(weak, ConfigSampler{}, 10, rng2);
    FAIL("expected ConstantsInvalid");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConstantsInvalid);
    CHECK(std::string(e.what()).find("alpha1*s_lower > 2*alpha2*d_bar") != std::string::npos);
  }
  CHECK(code_of([&] { require_recurrence_constants(weak); }) == Errc::ConstantsInvalid);

  auto lr = th::long_range_model();
  Rng rng3(5);
  auto lrep = drift_audit(lr, ConfigSampler{}, 100, rng3);
  CHECK(lrep.long_range);
  double extra = 0.0;
  for (int l = 2; l <= 8; ++l) extra += l * l * std::pow(l, -4.0);
  CHECK(lrep.C_bar == doctest::Approx(lrep.C + extra));
  CHECK(lrep.pass);
}

TEST_CASE("histograms and total variation") {
  Histogram a, b;
  a.add(1, 1.0);
  a.add(3, 3.0);
  b.add(1, 2.0);
  b.add(3, 2.0);
  CHECK(a.total() == 4.0);
  CHECK(a.probabilities().at(3) == 0.75);
  CHECK(tv_distance(a, b) == doctest::Approx(0.25));
  CHECK(tv_distance(a, a) == 0.0);
  Histogram c;
  c.add(5, 1.0);
  CHECK(tv_distance(a, c) == doctest::Approx(1.0));
  a.merge(c);
  CHECK(a.total() == 5.0);
  CHECK(Histogram{}.probabilities().empty());
}

TEST_CASE("short recurrence study") {
  auto m = reference_model();
  auto y0 = cfg({{0, 1}, {1, -1}, {2, 1}, {3, -1}, {4, 1}});
  RecurrenceOptions opt;
  opt.horizon = 200.0;
  opt.grid = {50.0, 100.0, 200.0};
  opt.windows = {{20.0, 100.0}, {100.0, 200.0}};
  Rng rng(3);
  auto s = recurrence_study(m, y0, opt, rng);
  REQUIRE(s.first_hit.has_value());
  CHECK(s.width_histogram.total() == doctest::Approx(180.0));
  REQUIRE(s.window_histograms.size() == 2);
  CHECK(s.window_histograms[0].total() == doctest::Approx(80.0));
  CHECK(s.window_histograms[1].total() == doctest::Approx(100.0));
  CHECK(s.width_at.size() == 3);
  CHECK(s.cesaro_count.back() == doctest::Approx(s.time_avg_count));
  CHECK(s.time_avg_count >= 1.0);
  for (double r : s.return_times) CHECK(r > 0);

  Rng rng2(3);
  auto again = recurrence_study(m, y0, opt, rng2);
  CHECK(again.n_events == s.n_events);
  auto sum = summarize({s, again});
  CHECK(sum.replicas == 2);
  CHECK(sum.returned == 2);
  CHECK(sum.mean_time_avg_count == doctest::Approx(s.time_avg_count));
  CHECK(sum.se_time_avg_count == doctest::Approx(0.0));
  CHECK(sum.mean_width_over_t.size() == 3);
}
