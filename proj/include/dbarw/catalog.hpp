#ifndef DBARW_CATALOG_HPP
#define DBARW_CATALOG_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbarw/rates.hpp"

namespace dbarw {

using WalkFactory = std::function<std::shared_ptr<const WalkFamily>(const nlohmann::json&)>;
using BranchFactory = std::function<std::shared_ptr<const BranchFamily>(const nlohmann::json&)>;
using LongRangeFactory =
    std::function<std::shared_ptr<const LongRangeFamily>(const nlohmann::json&)>;

/// Builds a catalog family.  Throws UnknownFamily for an unregistered id and
/// InvalidParameter when a documented constraint is violated.
std::shared_ptr<const WalkFamily> build_walk(const std::string& id, const nlohmann::json& params);
std::shared_ptr<const BranchFamily> build_branch(const std::string& id,
                                                 const nlohmann::json& params);
std::shared_ptr<const LongRangeFamily> build_long_range(const std::string& id,
                                                        const nlohmann::json& params);

/// Extension point for user families; an existing id is replaced.
void register_walk(const std::string& id, WalkFactory factory);
void register_branch(const std::string& id, BranchFactory factory);
void register_long_range(const std::string& id, LongRangeFactory factory);

std::vector<std::string> walk_ids();
std::vector<std::string> branch_ids();
std::vector<std::string> long_range_ids();

/// Strict reader for a family parameter record: every key must be consumed.
class ParamReader {
 public:
  ParamReader(std::string family, const nlohmann::json& params);

  double number(const std::string& key, double fallback);
  double required_number(const std::string& key);
  int integer(const std::string& key, int fallback);
  std::string text(const std::string& key, const std::string& fallback);
  ScalarFunction function(const std::string& key, const nlohmann::json& fallback);
  bool has(const std::string& key) const;
  /// Throws InvalidParameter on unknown keys; returns the resolved record.
  nlohmann::json finish();

  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::string family_;
  nlohmann::json given_;
  nlohmann::json resolved_ = nlohmann::json::object();
};

/// The reference model: alpha1 = 1, alpha2 = 0.1, symmetric walk 1/4,
/// constant branching 1, with its declared constants.
ModelSpec reference_model();

}  // namespace dbarw

#endif  // DBARW_CATALOG_HPP
