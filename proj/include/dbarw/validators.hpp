#ifndef DBARW_VALIDATORS_HPP
#define DBARW_VALIDATORS_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbarw/rates.hpp"
#include "dbarw/rng.hpp"

namespace dbarw {

/// Random valid configurations: odd count up to max_count, width up to
/// max_width, random charge, random offset in [-offset, offset].
struct ConfigSampler {
  std::size_t max_count = 9;
  std::int64_t max_width = 32;
  std::int64_t offset = 50;
  /// When nonzero only this charge is produced.
  int charge = 0;

  Configuration operator()(Rng& rng) const;
};

struct ValidationReport {
  std::string assumption;
  bool pass = true;
  std::size_t audited_samples = 0;
  std::optional<std::string> worst_witness;
  /// Smallest slack observed; negative when the check failed.
  double margin = 0.0;
  nlohmann::json details = nlohmann::json::object();
};

struct AuditOptions {
  std::size_t samples = 200;
  ConfigSampler sampler;
  /// L values probed by the A3 check.
  std::vector<int> l_grid{1, 2, 4, 8, 16, 32};
};

/// Every rate of the particle at idx in a fixed order: r, l, b, then b_l for
/// l = 2..L_max.
std::vector<double> rate_vector(const ModelSpec& model, const Configuration& y, std::size_t idx);

ValidationReport validate_A0(const ModelSpec& model, const AuditOptions& opt, Rng& rng);
ValidationReport validate_A1(const ModelSpec& model, const AuditOptions& opt, Rng& rng);
ValidationReport validate_A2(const ModelSpec& model, const AuditOptions& opt, Rng& rng);
ValidationReport validate_A3(const ModelSpec& model, const AuditOptions& opt, Rng& rng);
ValidationReport validate_A4(const ModelSpec& model, const AuditOptions& opt, Rng& rng,
                             A4Variant variant);
ValidationReport validate_A5(const ModelSpec& model, const AuditOptions& opt, Rng& rng);

/// A4 check on a single configuration; returns the slack (negative on
/// failure) and fills the witness text on failure.
double a4_check(const ModelSpec& model, const Configuration& y, A4Variant variant,
                std::string* witness);

/// All six reports in order, A4 using the declared variant.
std::vector<ValidationReport> validate_all(const ModelSpec& model, const AuditOptions& opt,
                                           std::uint64_t seed);

}  // namespace dbarw

#endif  // DBARW_VALIDATORS_HPP
