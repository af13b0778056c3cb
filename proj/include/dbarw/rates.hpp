#ifndef DBARW_RATES_HPP
#define DBARW_RATES_HPP

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "dbarw/functions.hpp"
#include "dbarw/lattice.hpp"

namespace dbarw {

struct RwRates {
  double r = 0.0;
  double l = 0.0;
};

/// Rank of the particle at index idx (0-based, left to right): ranks run
/// right-to-left for charge +1 and left-to-right for charge -1, from 1.
inline std::size_t rank_of(const Configuration& y, std::size_t idx) noexcept {
  return y.charge() > 0 ? y.count() - idx : idx + 1;
}
/// Inverse of rank_of.
inline std::size_t index_of_rank(const Configuration& y, std::size_t rank) noexcept {
  return y.charge() > 0 ? y.count() - rank : rank - 1;
}
/// Inter-particle distance L_j = |i_{j+1} - i_j| in rank order; infinite for
/// j = 0 and j = |y|.
double gap_of_rank(const Configuration& y, std::size_t j) noexcept;

class RateFamily {
 public:
  virtual ~RateFamily() = default;
  virtual std::string id() const = 0;
  virtual nlohmann::json params() const = 0;
  /// Whether the family claims translation invariance.
  virtual bool declares_a0() const { return true; }
};

/// Nearest-neighbour hopping rates.  rw_rates_as evaluates the formula for a
/// particle of sign `as` placed at the index; rw_rates uses the actual sign.
class WalkFamily : public RateFamily {
 public:
  virtual RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign as) const = 0;
  RwRates rw_rates(const Configuration& y, std::size_t idx) const {
    return rw_rates_as(y, idx, y[idx].sign);
  }
  /// True when r = l identically (zero drift).
  virtual bool zero_drift() const { return false; }
};

class BranchFamily : public RateFamily {
 public:
  virtual double branch_rate_as(const Configuration& y, std::size_t idx, Sign as) const = 0;
  double branch_rate(const Configuration& y, std::size_t idx) const {
    return branch_rate_as(y, idx, y[idx].sign);
  }
};

/// Branching to distance l in [2, max_range()]; sign independent.
class LongRangeFamily : public RateFamily {
 public:
  virtual int max_range() const = 0;
  virtual double long_branch_rate(const Configuration& y, std::size_t idx, int l) const = 0;
};

/// Envelope H(N, L) = amp * N^n_exp * L^(-l_power) * l_geom^L for L <= range
/// (range < 0 means unbounded) and 0 beyond.
struct Envelope {
  double amp = 0.0;
  double n_exp = 0.0;
  double l_power = 0.0;
  double l_geom = 1.0;
  int range = -1;

  double operator()(double n, double l) const;
};

enum class A4Variant { a, b, either };

struct DeclaredConstants {
  double s_lower = 0.0;
  double d_bar = 0.0;
  ScalarFunction B_n = ScalarFunction::constant(0.0);
  double D_bar = 1.0;
  ScalarFunction B_tilde = ScalarFunction::constant(0.0);
  Envelope H;
  double B_bar = 0.0;
  A4Variant a4 = A4Variant::a;
  /// Largest count the B_n table is audited up to.
  int n_audit = 10000;
};

struct ModelSpec {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::shared_ptr<const WalkFamily> walk;
  std::shared_ptr<const BranchFamily> branch;
  std::shared_ptr<const LongRangeFamily> long_range;
  DeclaredConstants constants;

  bool has_long_range() const noexcept { return long_range != nullptr; }
  int max_range() const noexcept { return long_range ? long_range->max_range() : 1; }

  /// Drift constants C = alpha1 s, c = alpha1 s / 2 - alpha2 d.
  double drift_C() const noexcept { return alpha1 * constants.s_lower; }
  double drift_c() const noexcept {
    return alpha1 * constants.s_lower / 2.0 - alpha2 * constants.d_bar;
  }
  /// C plus sum_{l=2}^{L_max} l^2 B_tilde(l) (equals C without long range).
  double drift_C_bar() const;
};

/// Rates p, q attached to the half-integer site cell + 1/2.  They are the
/// r and l rates of the particle at `cell` (the interface between the
/// heights at cell - 1/2 and cell + 1/2), or zero when no particle sits there.
struct PQView {
  double p = 0.0;
  double q = 0.0;
};

PQView pq_view(const ModelSpec& model, const Configuration& y, Site cell);

/// Partial sum over the configuration of f(|pos_idx - pos_i|) for i != idx.
double distance_sum(const Configuration& y, std::size_t idx, const ScalarFunction& f,
                    bool include_self = false);

}  // namespace dbarw

#endif  // DBARW_RATES_HPP
