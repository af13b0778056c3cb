#include "dbarw/rates.hpp"

#include <cmath>
#include <limits>

namespace dbarw {

double gap_of_rank(const Configuration& y, std::size_t j) noexcept {
  if (j == 0 || j >= y.count()) return std::numeric_limits<double>::infinity();
  Site a = y[index_of_rank(y, j)].position;
  Site b = y[index_of_rank(y, j + 1)].position;
  return static_cast<double>(a > b ? a - b : b - a);
}

double Envelope::operator()(double n, double l) const {
  if (range >= 0 && l > range) return 0.0;
  return amp * std::pow(n, n_exp) * std::pow(l, -l_power) * std::pow(l_geom, l);
}

double ModelSpec::drift_C_bar() const {
  double c = drift_C();
  if (!long_range) return c;
  for (int l = 2; l <= long_range->max_range(); ++l) {
    c += static_cast<double>(l) * l * constants.B_tilde(l);
  }
  return c;
}

PQView pq_view(const ModelSpec& model, const Configuration& y, Site cell) {
  auto idx = y.index_of(cell);
  if (!idx || !model.walk) return {};
  RwRates rr = model.walk->rw_rates(y, *idx);
  return {rr.r, rr.l};
}

double distance_sum(const Configuration& y, std::size_t idx, const ScalarFunction& f,
                    bool include_self) {
  double total = 0.0;
  Site at = y[idx].position;
  for (std::size_t i = 0; i < y.count(); ++i) {
    if (i == idx && !include_self) continue;
    Site d = y[i].position - at;
    total += f(static_cast<double>(d < 0 ? -d : d));
  }
  return total;
}

}  // namespace dbarw
