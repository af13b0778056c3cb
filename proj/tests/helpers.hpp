#ifndef DBARW_TESTS_HELPERS_HPP
#define DBARW_TESTS_HELPERS_HPP

#include <doctest.h>

#include <utility>
#include <vector>

#include "dbarw/catalog.hpp"
#include "dbarw/error.hpp"
#include "dbarw/lattice.hpp"

namespace th {

inline dbarw::Configuration cfg(std::vector<std::pair<dbarw::Site, int>> v) {
  std::vector<dbarw::Particle> ps;
  for (auto [p, s] : v) ps.push_back({p, s > 0 ? dbarw::Sign::plus : dbarw::Sign::minus});
  return dbarw::Configuration::from_particles(ps);
}

template <class F>
dbarw::Errc code_of(F&& fn) {
  try {
    fn();
  } catch (const dbarw::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return dbarw::Errc::Overflow;
}

inline dbarw::ModelSpec long_range_model() {
  dbarw::ModelSpec m = dbarw::reference_model();
  m.long_range = dbarw::build_long_range(
      "long_range_exp_psi", {{"beta1", 0.02}, {"beta2", 0.5}, {"L", 1}, {"max_range", 8}});
  m.constants.B_tilde = dbarw::ScalarFunction::parse("power:1,4");
  m.constants.H.amp = 1.0;
  m.constants.H.l_geom = 0.5;
  return m;
}

}  // namespace th

#endif  // DBARW_TESTS_HELPERS_HPP
