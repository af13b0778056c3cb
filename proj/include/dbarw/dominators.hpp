#ifndef DBARW_DOMINATORS_HPP
#define DBARW_DOMINATORS_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dbarw/functions.hpp"
#include "dbarw/rates.hpp"
#include "dbarw/rng.hpp"

namespace dbarw {

/// B(N) = max_{1<=n<=N} n B_n, extended lazily.  B(N) = 0 for N < 1.
class BOfTable {
 public:
  explicit BOfTable(ScalarFunction b_n) : b_n_(std::move(b_n)) {}
  double operator()(std::int64_t N);

 private:
  ScalarFunction b_n_;
  std::vector<double> running_{0.0};
};

double B_of(const ScalarFunction& b_n, std::int64_t N);

/// Smallest N0 >= 1 such that max_{m<=M} B_m <= D_bar M for every M in
/// [N0, n_audit]; nullopt when even M = n_audit fails.  A constant table
/// gives 1.
std::optional<std::int64_t> find_N0(const ScalarFunction& b_n, double D_bar, std::int64_t n_audit);

/// max{2 a1 + 2 a2 max_{n<=N0} B_n, 2 a1 + 2 a2 D_bar}.  K must exceed it.
double K_threshold(double alpha1, double alpha2, const ScalarFunction& b_n, std::int64_t N0,
                   double D_bar);

struct DominatorParams {
  std::int64_t w0 = 1;
  std::int64_t n0 = 1;
  double K = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  ScalarFunction B_n = ScalarFunction::constant(0.0);
  /// B(n0 + 2k) for k = 0..B_of_N.size() - 1.
  std::vector<double> B_of_N;
  /// Sum over l >= 2 of B_tilde(l), truncated at the finite range if any.
  double D = 0.0;
  double B_bar = 0.0;
  double D_bar = 1.0;
  std::int64_t N0 = 1;
  double K_min = 0.0;
  /// Holding rate of the long-range chain is h_factor (a1 + a2 B_bar + D).
  double h_factor = 2.0;
};

/// Parameters for a model and initial configuration; B_of_N is filled for
/// `steps` dominator steps.  Throws ConstantsInvalid when N0 does not exist
/// within the audit window or D diverges.
DominatorParams make_dominator_params(const ModelSpec& model, std::int64_t w0, std::int64_t n0,
                                      double K, std::size_t steps = 64);

/// Mean of the n-th holding time of the dominating step counter,
/// 1 / (a1 (n0 + 2n) + a2 B(n0 + 2n)).
double m_tilde(double alpha1, double alpha2, const ScalarFunction& b_n, std::int64_t n0,
               std::int64_t n);

enum class DominatorEventKind { start, q_birth, h_double, h_step };
std::string_view dominator_kind_name(DominatorEventKind kind);
DominatorEventKind parse_dominator_kind(std::string_view name);

struct DominatorPoint {
  double time = 0.0;
  DominatorEventKind kind = DominatorEventKind::start;
  std::int64_t value = 0;

  friend bool operator==(const DominatorPoint&, const DominatorPoint&) = default;
};

using DominatorPath = std::vector<DominatorPoint>;

/// Maximum width process: starts at w0 + 1 at time 0 and jumps +1 at rate
/// K times its current value, up to the horizon.
DominatorPath sample_Q(std::int64_t w0, double K, double horizon, Rng& rng,
                       std::uint64_t max_events = 10'000'000ULL);

/// Long-range width chain: H_0 = w0, jumps at rate h_factor (a1 + a2 B_bar + D),
/// doubling with probability D / (a1 + D) and otherwise stepping by 1.
DominatorPath sample_H(std::int64_t w0, double alpha1, double alpha2, double B_bar, double D,
                       double horizon, Rng& rng, double h_factor = 2.0,
                       std::uint64_t max_events = 10'000'000ULL);

/// Value of a path at time t (right-continuous).
std::int64_t path_value_at(const DominatorPath& path, double t);

}  // namespace dbarw

#endif  // DBARW_DOMINATORS_HPP
