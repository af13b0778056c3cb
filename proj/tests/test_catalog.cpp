#include <doctest.h>

#include <cmath>

#include "dbarw/catalog.hpp"
#include "dbarw/functions.hpp"
#include "dbarw/validators.hpp"

using namespace dbarw;
using nlohmann::json;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Overflow;
}

Configuration cfg(std::vector<std::pair<Site, int>> v) {
  std::vector<Particle> ps;
  for (auto [p, s] : v) ps.push_back({p, s > 0 ? Sign::plus : Sign::minus});
  return Configuration::from_particles(ps);
}

}  // namespace

TEST_CASE("scalar function descriptors") {
  CHECK(ScalarFunction::from_json(2.5)(7) == 2.5);
  auto t = ScalarFunction::from_json(json::array({1.0, 2.0, 3.0}));
  CHECK(t(-1) == 1.0);
  CHECK(t(1.7) == 2.0);
  CHECK(t(99) == 3.0);
  CHECK(ScalarFunction::parse("power:2,2")(4) == doctest::Approx(0.125));
  CHECK(ScalarFunction::parse("power:1,1,1")(0) == 1.0);
  CHECK(ScalarFunction::parse("geom:0.5,0.5")(3) == doctest::Approx(0.0625));
  CHECK(ScalarFunction::parse("exp:1,1")(1) == doctest::Approx(std::exp(-1.0)));
  CHECK(ScalarFunction::parse("log:1,1")(std::exp(2.0)) == doctest::Approx(3.0));
  CHECK(ScalarFunction::parse("delta:3,0")(0) == 3.0);
  CHECK(ScalarFunction::parse("delta:3,0")(1) == 0.0);
  CHECK(ScalarFunction::parse("step:2,4")(4) == 2.0);
  CHECK(ScalarFunction::parse("step:2,4")(5) == 0.0);
  auto il = ScalarFunction::parse("iterlog:1,1");
  CHECK(il(10) == doctest::Approx(1.0 / (10 * std::log(10.0))));
  CHECK(il(0) == il(2));
  CHECK(code_of([] { ScalarFunction::parse("nope:1"); }) == Errc::InvalidParameter);
  CHECK(code_of([] { ScalarFunction::parse("power:1"); }) == Errc::InvalidParameter);
  CHECK(code_of([] { ScalarFunction::parse("power:1,x"); }) == Errc::InvalidParameter);

  // Tail bounds dominate a long partial sum and vanish for divergent series.
  auto p = ScalarFunction::parse("power:1,2");
  double partial = 0;
  for (int k = 1; k < 100000; ++k) partial += p(k);
  REQUIRE(p.tail_bound(1).has_value());
  CHECK(*p.tail_bound(1) >= partial);
  CHECK_FALSE(ScalarFunction::parse("power:1,1").tail_bound(1).has_value());
  auto g = ScalarFunction::parse("geom:1,0.5");
  CHECK(*g.tail_bound(0) == doctest::Approx(2.0));
}

TEST_CASE("every catalog family builds with defaults and yields finite nonnegative rates") {
  Rng rng(3);
  ConfigSampler s;
  std::vector<Configuration> ys;
  for (int k = 0; k < 40; ++k) ys.push_back(s(rng));
  ys.push_back(Configuration::singleton(0));
  for (const auto& id : walk_ids()) {
    CAPTURE(id);
    auto w = build_walk(id, json::object());
    CHECK(w->id() == id);
    for (const auto& y : ys)
      for (std::size_t i = 0; i < y.count(); ++i)
        for (Sign as : {Sign::plus, Sign::minus}) {
          auto r = w->rw_rates_as(y, i, as);
          REQUIRE(std::isfinite(r.r));
          REQUIRE(std::isfinite(r.l));
          REQUIRE(r.r >= 0);
          REQUIRE(r.l >= 0);
        }
  }
  for (const auto& id : branch_ids()) {
    CAPTURE(id);
    auto b = build_branch(id, json::object());
    for (const auto& y : ys)
      for (std::size_t i = 0; i < y.count(); ++i)
        for (Sign as : {Sign::plus, Sign::minus}) {
          double v = b->branch_rate_as(y, i, as);
          REQUIRE(std::isfinite(v));
          REQUIRE(v >= 0);
        }
  }
  for (const auto& id : long_range_ids()) {
    auto lr = build_long_range(id, json::object());
    CHECK(lr->max_range() == 8);
    for (const auto& y : ys)
      for (std::size_t i = 0; i < y.count(); ++i)
        for (int l = 2; l <= 8; ++l) REQUIRE(lr->long_branch_rate(y, i, l) >= 0);
  }
  CHECK(walk_ids().size() >= 11);
  CHECK(branch_ids().size() >= 11);
}

TEST_CASE("catalog errors") {
  CHECK(code_of([] { build_walk("no_such_family", json::object()); }) == Errc::UnknownFamily);
  CHECK(code_of([] { build_branch("no_such_family", json::object()); }) == Errc::UnknownFamily);
  CHECK(code_of([] { build_walk("const_symmetric", {{"rate", -1}}); }) == Errc::InvalidParameter);
  CHECK(code_of([] { build_walk("const_symmetric", {{"typo", 1}}); }) == Errc::InvalidParameter);
  CHECK(code_of([] { build_branch("const_branch", {{"beta", 0}}); }) == Errc::InvalidParameter);
  CHECK(code_of([] { build_walk("dist_attract_rank", {{"psi", "geom:0.6,0.5"}}); }) ==
        Errc::InvalidParameter);
  CHECK(code_of([] { build_long_range("long_range_exp_psi", {{"max_range", 1}}); }) ==
        Errc::InvalidParameter);
}

TEST_CASE("documented family values") {
  auto y = cfg({{0, 1}, {3, -1}, {7, 1}});
  auto sym = build_walk("const_symmetric", json::object());
  CHECK(sym->rw_rates(y, 1).r == 0.25);
  CHECK(sym->rw_rates(y, 1).l == 0.25);
  auto gh = build_walk("rank_g_h", {{"g", 0.5}, {"h", 0.5}});
  for (std::size_t i = 0; i < y.count(); ++i) {
    CHECK(gh->rw_rates(y, i).r == doctest::Approx(0.25));
    CHECK(gh->rw_rates(y, i).l == doctest::Approx(0.75));
  }
  auto cb = build_branch("const_branch", json::object());
  CHECK(cb->branch_rate(y, 0) == 1.0);
  // The constant-drift family normalized by f + g gives r = f / (f + g).
  auto cd = build_walk("const_drift", {{"f", 0.6}, {"g", 0.2}, {"normalization", "sum"}});
  auto r = cd->rw_rates(Configuration::singleton(0), 0);
  CHECK(r.r + r.l == doctest::Approx(1.0));
}

TEST_CASE("reference model declared constants") {
  auto m = reference_model();
  CHECK(m.alpha1 == 1.0);
  CHECK(m.alpha2 == 0.1);
  CHECK(m.drift_C() == doctest::Approx(0.5));
  CHECK(m.drift_c() == doctest::Approx(0.15));
  CHECK(m.drift_C_bar() == m.drift_C());
  auto y = cfg({{0, 1}, {1, -1}, {2, 1}});
  auto pq = pq_view(m, y, 1);
  CHECK(pq.p == 0.25);
  CHECK(pq.q == 0.25);
  CHECK(pq_view(m, y, 5).p == 0.0);
  CHECK(pq_view(m, y, 5).q == 0.0);
}

TEST_CASE("ranks and gaps") {
  auto y = cfg({{0, 1}, {2, -1}, {7, 1}});
  CHECK(rank_of(y, 2) == 1);
  CHECK(rank_of(y, 0) == 3);
  CHECK(index_of_rank(y, 1) == 2);
  CHECK(gap_of_rank(y, 1) == 5);
  CHECK(gap_of_rank(y, 2) == 2);
  CHECK(std::isinf(gap_of_rank(y, 0)));
  CHECK(std::isinf(gap_of_rank(y, 3)));
  auto z = cfg({{0, -1}, {2, 1}, {7, -1}});
  CHECK(rank_of(z, 0) == 1);
  CHECK(gap_of_rank(z, 1) == 2);
}
