#include <doctest.h>

#include <limits>

#include "dbarw/lattice.hpp"
#include "dbarw/rng.hpp"
#include "dbarw/validators.hpp"
#include "oracles.hpp"

using namespace dbarw;

namespace {

Configuration cfg(std::vector<std::pair<Site, int>> v) {
  std::vector<Particle> ps;
  for (auto [p, s] : v) ps.push_back({p, s > 0 ? Sign::plus : Sign::minus});
  return Configuration::from_particles(ps);
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Overflow;
}

}  // namespace

TEST_CASE("construction validates parity, alternation and distinctness") {
  CHECK(code_of([] { cfg({{0, 1}, {1, -1}}); }) == Errc::EvenCount);
  CHECK(code_of([] { cfg({{0, 1}, {1, 1}, {2, 1}}); }) == Errc::NonAlternating);
  CHECK(code_of([] { cfg({{0, 1}, {0, -1}, {2, 1}}); }) == Errc::DuplicatePosition);
  CHECK(code_of([] { Configuration::from_particles({{0, static_cast<Sign>(2)}}); }) ==
        Errc::InvalidSign);
  CHECK(code_of([] { Configuration::from_particles({}); }) == Errc::EvenCount);
  auto y = cfg({{5, 1}, {0, 1}, {2, -1}});
  CHECK(y[0].position == 0);
  CHECK(y.charge() == 1);
  CHECK(y.width() == 6);
  CHECK(y.count_in(1, 4) == 1);
  CHECK(to_string(y) == "[[0,1],[2,-1],[5,1]]");
}

TEST_CASE("height duality on the documented examples") {
  auto h = to_height(Configuration::singleton(0));
  CHECK(h.left_limit() == 0);
  CHECK(h.flips().size() == 1);
  CHECK(h.at(-1) == 0);
  CHECK(h.at(0) == 1);

  auto y = cfg({{0, 1}, {2, -1}, {5, 1}});
  auto x = to_height(y);
  std::vector<int> expect{0, 1, 1, 0, 0, 0, 1, 1};  // cells -1..6
  for (Site c = -1; c <= 6; ++c) CHECK(x.at(c) == expect[static_cast<std::size_t>(c + 1)]);
  CHECK(to_interface(x) == y);
  CHECK(code_of([] { HeightFunction::from_flips(0, {0, 1}); }) == Errc::EvenCount);
  CHECK(code_of([] { HeightFunction::from_flips(0, {1, 0, 3}); }) == Errc::DuplicatePosition);
}

TEST_CASE("duality round trip on random configurations") {
  Rng rng(11);
  ConfigSampler s;
  s.max_width = 64;
  s.max_count = 21;
  for (int k = 0; k < 300; ++k) {
    auto y = s(rng);
    auto x = to_height(y);
    REQUIRE(to_interface(x) == y);
    REQUIRE(to_height(to_interface(x)) == x);
    // Heights agree with the prefix-sum oracle.
    auto dense = oracle::heights(y, y.left() - 2, y.right() + 2);
    for (Site c = y.left() - 2; c <= y.right() + 2; ++c) {
      REQUIRE(x.at(c) == dense[static_cast<std::size_t>(c - y.left() + 2)]);
    }
  }
}

TEST_CASE("f_cd values and oracles") {
  CHECK(f_cd(Configuration::singleton(3)) == 0);
  CHECK(f_cd(Configuration::singleton(3, Sign::minus)) == 0);
  CHECK(f_cd(cfg({{0, 1}, {2, -1}, {5, 1}})) == 6);
  CHECK(f_cd(cfg({{0, 1}, {1, -1}, {2, 1}})) == 1);
  CHECK(f_cd(cfg({{0, -1}, {1, 1}, {2, -1}})) == 1);
  Rng rng(5);
  ConfigSampler s;
  s.max_width = 40;
  s.max_count = 15;
  for (int k = 0; k < 300; ++k) {
    auto y = s(rng);
    REQUIRE(f_cd(y) == oracle::fcd_pairs(y));
  }
  for (int w = 1; w <= 6; ++w) {
    for (const auto& y : oracle::all_configs_of_width(w)) REQUIRE(f_cd(y) == oracle::bfs_fcd(y));
  }
}

TEST_CASE("transition application") {
  auto y = cfg({{0, 1}, {1, -1}, {2, 1}});
  CHECK(apply_rw(y, 0, Direction::right) == Configuration::singleton(2));
  CHECK(apply_rw(y, 2, Direction::right) == cfg({{0, 1}, {1, -1}, {3, 1}}));
  CHECK(apply_branch(Configuration::singleton(0), 0) == cfg({{-1, 1}, {0, -1}, {1, 1}}));
  // Branching next to a neighbour annihilates with it.
  CHECK(apply_branch(y, 2) == cfg({{0, 1}, {2, -1}, {3, 1}}));
  CHECK(code_of([&] { apply_rw(y, 5, Direction::left); }) == Errc::EmptySite);
  CHECK(apply_long_branch(Configuration::singleton(0), 0, 3) == cfg({{-3, 1}, {0, -1}, {3, 1}}));
  CHECK(code_of([&] { apply_long_branch(y, 2, 2); }) == Errc::InteriorOccupied);
  CHECK(code_of([&] { apply_long_branch(y, 2, 1); }) == Errc::InvalidRange);
  // Offspring landing on an opposite particle annihilate.
  auto z = cfg({{0, 1}, {3, -1}, {6, 1}});
  CHECK(apply_long_branch(z, 6, 3) == cfg({{0, 1}, {6, -1}, {9, 1}}));
  CHECK(careful_condition(z, 6, 3));
  CHECK_FALSE(careful_condition(z, 6, 4));
  CHECK(code_of([] {
          apply_rw(Configuration::singleton(std::numeric_limits<Site>::max()), std::numeric_limits<Site>::max(),
                   Direction::right);
        }) == Errc::Overflow);
}

TEST_CASE("anchored view") {
  auto y = cfg({{3, 1}, {4, -1}, {9, 1}});
  AnchoredConfiguration a(y);
  CHECK(a.offset() == 3);
  CHECK(a.shape() == cfg({{0, 1}, {1, -1}, {6, 1}}));
  CHECK(a == AnchoredConfiguration(y.translated(-100)));
  CHECK(y.translated(2).left() == 5);
}
