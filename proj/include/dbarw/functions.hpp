#ifndef DBARW_FUNCTIONS_HPP
#define DBARW_FUNCTIONS_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dbarw {

/// Real function of one real argument used to parameterize rate families.
///
/// Accepted descriptors:
///   number                  constant
///   [v0, v1, ...]           table indexed by floor(x), x < 0 clamps to v0,
///                           extended by the last entry
///   "const:v"               v
///   "power:a,e[,o]"         a * max(x + o, 1)^(-e)
///   "exp:a,r"               a * exp(-r x)
///   "geom:a,rho"            a * rho^x
///   "log:a,b"               a * log(max(x, 1)) + b
///   "logistic:lo,hi,s,c"    lo + (hi - lo) / (1 + exp(-s (x - c)))
///   "iterlog:a,k"           a / (x log x log log x ... log^(k) x), flat below
///                           the first x where every factor exceeds 1
///   "delta:v,at"            v if x == at else 0
///   "step:v,cut"            v if x <= cut else 0
class ScalarFunction {
 public:
  enum class Kind { constant, table, power, exp, geom, log, logistic, iterlog, delta, step };

  ScalarFunction() = default;
  static ScalarFunction constant(double v);
  static ScalarFunction parse(const std::string& text);
  static ScalarFunction from_json(const nlohmann::json& j);

  double operator()(double x) const;

  Kind kind() const noexcept { return kind_; }
  nlohmann::json to_json() const;
  std::string describe() const;

  /// Upper bound on sum_{k >= 0} |f(from + k * step)|, or nullopt when the
  /// series is not known to converge.
  std::optional<double> tail_bound(double from, double step = 1.0) const;

  /// Grid check of monotonicity over integer points lo..hi.
  bool nonincreasing_on(int lo, int hi) const;
  bool nondecreasing_on(int lo, int hi) const;
  /// Min and max over the integer grid lo..hi.
  std::pair<double, double> range_on(int lo, int hi) const;

 private:
  Kind kind_ = Kind::constant;
  std::vector<double> p_{0.0};
  std::string text_ = "0";
};

}  // namespace dbarw

#endif  // DBARW_FUNCTIONS_HPP
