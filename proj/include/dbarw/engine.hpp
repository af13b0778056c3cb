#ifndef DBARW_ENGINE_HPP
#define DBARW_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbarw/lattice.hpp"
#include "dbarw/rates.hpp"
#include "dbarw/rng.hpp"

namespace dbarw {

enum class TransitionKind { rw_left, rw_right, branch, long_branch };

std::string_view kind_name(TransitionKind kind);
TransitionKind parse_kind(std::string_view name);

struct Transition {
  TransitionKind kind = TransitionKind::rw_left;
  Site site = 0;
  /// 1 for nearest-neighbour moves, l for long-range branching.
  int range = 1;
  double rate = 0.0;
  std::optional<Configuration> successor;
};

/// Applies the move described by (kind, site, range) to y.  Long-range moves
/// re-check the careful condition independently of enumeration.
Configuration apply_transition(const Configuration& y, TransitionKind kind, Site site, int range);

/// Enabled transitions with positive rate, ordered by site, then rw_left,
/// rw_right, branch, long_branch with l ascending.
std::vector<Transition> enumerate_transitions(const ModelSpec& model, const Configuration& y,
                                              bool with_successors = true);
double total_rate(const std::vector<Transition>& ts) noexcept;

struct Event {
  double time = 0.0;
  TransitionKind kind = TransitionKind::rw_left;
  Site site = 0;
  int range = 1;
  std::size_t pre_count = 0;
  std::size_t post_count = 0;
  std::int64_t pre_width = 0;
  std::int64_t post_width = 0;
  std::int64_t post_fcd = 0;
  int charge = 1;

  friend bool operator==(const Event&, const Event&) = default;
};

struct StepResult {
  double dt = 0.0;
  Event event;
  Configuration next;
};

/// One Gillespie step: dt is drawn first, then the transition by
/// cumulative-sum inversion.  The event time is left at dt.
StepResult step(const Configuration& y, const ModelSpec& model, Rng& rng);

struct StopRule {
  std::optional<double> horizon;
  std::optional<std::uint64_t> max_events;
  bool until_singleton = false;
};

enum class RecordMode { events, summary };

/// Receives the piecewise-constant path: hold(state, t0, t1) for every
/// holding interval (the last one truncated at the stopping time) and
/// event(e, post) after every jump.
class PathObserver {
 public:
  virtual ~PathObserver() = default;
  virtual void hold(const Configuration& state, double t0, double t1) = 0;
  virtual void event(const Event& e, const Configuration& post) = 0;
};

struct Trajectory {
  Configuration initial = Configuration::singleton(0);
  Configuration final_state = Configuration::singleton(0);
  std::vector<Event> events;
  double horizon = 0.0;
  double end_time = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t n_events = 0;
  std::optional<double> hit_singleton_time;
  std::int64_t max_width = 0;
  double time_avg_count = 0.0;
};

/// Default event budget per run, overridden by env DBARW_EVENT_BUDGET.
std::uint64_t default_event_budget();

/// Runs until the stop rule fires.  At least one of horizon, max_events or
/// until_singleton must be set.  Throws EventBudgetExceeded when the budget
/// runs out first, and NoTransitions when the total rate vanishes without a
/// horizon to hold until.
Trajectory simulate(const ModelSpec& model, const Configuration& initial, const StopRule& stop,
                    Rng& rng, RecordMode mode, std::uint64_t seed = 0,
                    PathObserver* observer = nullptr,
                    std::uint64_t event_budget = default_event_budget());

/// Re-applies every event from the initial configuration and checks each
/// recorded observable; returns the final configuration.
Configuration replay(const Configuration& initial, const std::vector<Event>& events);

struct CouplingOptions {
  /// Exact tracking of the dominating counter stops here; afterwards a lower
  /// bound (cap plus coupled increments) is used, which keeps every check sound
  /// because all checks are monotone in the counter.
  std::uint64_t exact_cap = 4096;
  bool record_path = false;
  std::uint64_t event_budget = default_event_budget();
};

struct PathPoint {
  double time = 0.0;
  std::int64_t value = 0;
  std::int64_t dominator = 0;
};

struct CoupledWidthResult {
  std::uint64_t y_events = 0;
  std::uint64_t q_births_exact = 0;
  std::uint64_t violations = 0;
  std::string first_violation;
  bool saturated = false;
  std::int64_t final_width = 0;
  std::int64_t final_q = 0;
  std::int64_t max_width = 0;
  std::vector<PathPoint> path;
};

/// Couples the width W(t) with the maximum width process Q started at
/// w0 + 1 and jumping at rate K Q.  A violation is recorded when the
/// width-growth rate exceeds its envelope 2 alpha1 + 2 alpha2 B_|y|, when the
/// envelope exceeds K Q, or when W > Q.  Requires a nearest-neighbour model.
CoupledWidthResult simulate_coupled_width(const ModelSpec& model, const Configuration& initial,
                                          double K, double horizon, Rng& rng,
                                          const CouplingOptions& opt = {});

struct CoupledStepsResult {
  std::uint64_t y_events = 0;
  std::uint64_t n_tilde = 0;
  std::uint64_t violations = 0;
  std::string first_violation;
  bool saturated = false;
  std::vector<PathPoint> path;
};

/// Couples the step count N(t) with the pure counting process whose n-th
/// holding time has rate alpha1 (n0 + 2n) + alpha2 B(n0 + 2n).
CoupledStepsResult simulate_coupled_steps(const ModelSpec& model, const Configuration& initial,
                                          double horizon, Rng& rng,
                                          const CouplingOptions& opt = {});

/// Width-growth rate of y: total rate of transitions increasing the width.
double width_growth_rate(const ModelSpec& model, const Configuration& y);

/// Total rate with both signs' rates summed at every occupied site, the
/// envelope used in the finiteness argument.  Dynamics use the actual
/// sign-resolved total instead.
double envelope_rate(const ModelSpec& model, const Configuration& y);

}  // namespace dbarw

#endif  // DBARW_ENGINE_HPP
