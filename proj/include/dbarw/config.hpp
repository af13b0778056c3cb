#ifndef DBARW_CONFIG_HPP
#define DBARW_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dbarw/engine.hpp"
#include "dbarw/rates.hpp"

namespace dbarw {

enum class StopKind { horizon, singleton, max_events };

struct RunParams {
  RecordMode mode = RecordMode::summary;
  std::optional<double> horizon;
  std::optional<std::uint64_t> max_events;
  std::optional<std::uint64_t> seed;
  std::uint64_t replicas = 1;
  double burn_in = 0.1;
  StopKind stop = StopKind::horizon;
  double K = 3.0;
  std::size_t samples = 200;
  std::int64_t width = 32;
  std::size_t max_count = 9;
  std::uint64_t exact_cap = 4096;
  double h_factor = 2.0;
  std::vector<double> grid;
  std::vector<std::pair<double, double>> windows;
  std::optional<std::uint64_t> event_budget;
};

struct OutputParams {
  std::string directory = "./out";
  std::vector<std::string> formats{"csv", "json"};
  bool wants(const std::string& f) const;
};

struct RunConfig {
  nlohmann::json model_json;
  ModelSpec model;
  Configuration initial = Configuration::singleton(0);
  RunParams run;
  OutputParams output;

  StopRule stop_rule() const;
  /// DBARW_EVENT_BUDGET when set, else the config value, else the default.
  std::uint64_t event_budget() const;
};

/// Parse failures (syntax, types, missing or unknown fields, invalid initial
/// configuration) throw ConfigParse; family construction failures keep their
/// UnknownFamily / InvalidParameter codes; inconsistent model values throw
/// ModelInvalid.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

ModelSpec model_from_json(const nlohmann::json& j);
DeclaredConstants constants_from_json(const nlohmann::json& j);

Configuration configuration_from_json(const nlohmann::json& j);
nlohmann::json configuration_to_json(const Configuration& y);

}  // namespace dbarw

#endif  // DBARW_CONFIG_HPP
