#ifndef DBARW_IO_HPP
#define DBARW_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "dbarw/diagnostics.hpp"
#include "dbarw/dominators.hpp"
#include "dbarw/engine.hpp"
#include "dbarw/validators.hpp"

namespace dbarw {

inline constexpr const char* kTrajectoryHeader =
    "time,event_kind,site,range,pre_count,post_count,post_width,post_fcd,charge";

/// %.17g for every double.
std::string format_double(double v);
/// JSON text with doubles in %.17g (2-space indent, trailing newline).
std::string dump_json(const nlohmann::json& j);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
nlohmann::json read_json(const std::string& path);

std::string trajectory_csv(const std::vector<Event>& events);
/// Parses the trajectory CSV.  pre_width is not stored; it is rebuilt from
/// the previous event's post_width, starting with initial_width.
std::vector<Event> parse_trajectory_csv(const std::string& text, std::int64_t initial_width);

nlohmann::json summary_json(const Trajectory& tr);
struct RunSummary {
  std::uint64_t seed = 0;
  std::uint64_t n_events = 0;
  std::size_t final_count = 0;
  std::optional<double> hit_singleton_time;
  std::int64_t max_width = 0;
  double time_avg_count = 0.0;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};
RunSummary summary_from_json(const nlohmann::json& j);
RunSummary summarize_run(const Trajectory& tr);

nlohmann::json report_json(const ValidationReport& r);
ValidationReport report_from_json(const nlohmann::json& j);

nlohmann::json drift_report_json(const DriftReport& r);
DriftReport drift_report_from_json(const nlohmann::json& j);

nlohmann::json recurrence_json(const RecurrenceSummary& s);
std::string histogram_csv(const Histogram& h);
/// (width, probability) rows.
std::vector<std::pair<std::int64_t, double>> parse_histogram_csv(const std::string& text);

/// Dominator paths in the trajectory schema: the value goes in post_width,
/// the jump size in range, other count columns are 0.
std::string dominator_csv(const DominatorPath& path);
DominatorPath parse_dominator_csv(const std::string& text);

}  // namespace dbarw

#endif  // DBARW_IO_HPP
