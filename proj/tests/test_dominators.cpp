#include <doctest.h>

#include <cmath>

#include "dbarw/catalog.hpp"
#include "dbarw/dominators.hpp"
#include "helpers.hpp"

using namespace dbarw;
using th::code_of;

TEST_CASE("B(N) as a running maximum") {
  auto m = reference_model();
  CHECK(B_of(m.constants.B_n, 3) == 6.0);
  CHECK(B_of(m.constants.B_n, 0) == 0.0);
  auto inv = ScalarFunction::parse("power:1,1");
  for (int N : {1, 5, 100}) CHECK(B_of(inv, N) == doctest::Approx(1.0));
  BOfTable t(m.constants.B_n);
  CHECK(t(10) == 20.0);
  CHECK(t(4) == 8.0);
}

TEST_CASE("staircase table: each plateau contributes one to the reciprocal sum") {
  // B(n) = 8 on [1, 10) and 10240 on [10, 10250), given through B_n = B(n) / n.
  nlohmann::json tab = nlohmann::json::array();
  tab.push_back(0.0);
  for (int n = 1; n < 10250; ++n) tab.push_back((n < 10 ? 8.0 : 10240.0) / n);
  auto b = ScalarFunction::from_json(tab);
  BOfTable B(b);
  double first = 0.0, second = 0.0;
  for (int N = 2; N < 10; ++N) first += 1.0 / B(N);
  for (int N = 10; N < 10250; ++N) second += 1.0 / B(N);
  CHECK(first == doctest::Approx(1.0));
  CHECK(second == doctest::Approx(1.0));
  CHECK(B(9) == 8.0);
  CHECK(B(10) == 10240.0);
}

TEST_CASE("N0 and the K threshold") {
  auto m = reference_model();
  CHECK(find_N0(m.constants.B_n, 1.0, 10000) == 1);
  CHECK(K_threshold(1.0, 0.1, m.constants.B_n, 1, 1.0) == doctest::Approx(2.4));
  // Linear growth beyond D_bar has no N0.
  nlohmann::json lin = nlohmann::json::array();
  for (int n = 0; n <= 1000; ++n) lin.push_back(2.0 * n);
  CHECK_FALSE(find_N0(ScalarFunction::from_json(lin), 1.0, 1000).has_value());
  // A bump at small n pushes N0 past it.
  nlohmann::json tab = {0.0, 1.0, 1.0, 1.0, 5.0, 1.0};
  auto n0 = find_N0(ScalarFunction::from_json(tab), 1.0, 100);
  REQUIRE(n0.has_value());
  CHECK(*n0 == 5);
  auto p = make_dominator_params(m, 5, 3, 3.0);
  CHECK(p.K_min == doctest::Approx(2.4));
  CHECK(p.N0 == 1);
  CHECK(p.D == 0.0);
  CHECK(p.B_of_N.at(0) == 6.0);
  auto lr = th::long_range_model();
  auto q = make_dominator_params(lr, 5, 3, 3.0);
  double D = 0.0;
  for (int l = 2; l <= 8; ++l) D += std::pow(l, -4.0);
  CHECK(q.D == doctest::Approx(D));
}

TEST_CASE("mean holding times of the step counter") {
  auto m = reference_model();
  CHECK(m_tilde(1.0, 0.1, m.constants.B_n, 1, 1) == doctest::Approx(1.0 / 3.6));
  CHECK(m_tilde(1.0, 0.1, m.constants.B_n, 1, 0) == doctest::Approx(1.0 / 1.2));
}

TEST_CASE("maximum width process") {
  Rng rng(1);
  const int n = 20000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    auto path = sample_Q(1, 3.0, 1.0, rng);
    sum += path.size() > 1 ? path[1].time : 1.0;
  }
  // First holding time has rate K (w0 + 1) = 6; E min(T, 1) = (1 - e^-6) / 6.
  CHECK(std::abs(sum / n - (1.0 - std::exp(-6.0)) / 6.0) < 4 * (1.0 / 6.0) / std::sqrt(n));

  auto zero = sample_Q(4, 3.0, 0.0, rng);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].value == 5);
  CHECK(zero[0].kind == DominatorEventKind::start);

  auto path = sample_Q(2, 1.0, 2.0, rng);
  for (std::size_t k = 1; k < path.size(); ++k) {
    CHECK(path[k].value == path[k - 1].value + 1);
    CHECK(path[k].kind == DominatorEventKind::q_birth);
    CHECK(path[k].time > path[k - 1].time);
  }
  CHECK(path_value_at(path, 0.0) == 3);
  CHECK(path_value_at(path, 2.0) == path.back().value);
}

TEST_CASE("long-range width chain") {
  Rng rng(2);
  auto steps = sample_H(3, 1.0, 0.1, 2.0, 0.0, 5.0, rng);
  CHECK(steps.front().value == 3);
  for (std::size_t k = 1; k < steps.size(); ++k) {
    CHECK(steps[k].kind == DominatorEventKind::h_step);
    CHECK(steps[k].value == steps[k - 1].value + 1);
  }
  auto dbl = sample_H(3, 0.0, 0.0, 0.0, 0.5, 5.0, rng);
  REQUIRE(dbl.size() > 1);
  for (std::size_t k = 1; k < dbl.size(); ++k) {
    CHECK(dbl[k].kind == DominatorEventKind::h_double);
    CHECK(dbl[k].value == 2 * dbl[k - 1].value);
  }
  auto still = sample_H(3, 0.0, 0.0, 0.0, 0.0, 5.0, rng);
  CHECK(still.size() == 1);
}

TEST_CASE("dominator kind names round trip") {
  for (auto k : {DominatorEventKind::start, DominatorEventKind::q_birth, DominatorEventKind::h_double,
                 DominatorEventKind::h_step})
    CHECK(parse_dominator_kind(dominator_kind_name(k)) == k);
  CHECK(code_of([] { parse_dominator_kind("other"); }) == Errc::ConfigParse);
}
