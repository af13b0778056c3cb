#include "dbarw/catalog.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>

namespace dbarw {

ParamReader::ParamReader(std::string family, const nlohmann::json& params)
    : family_(std::move(family)), given_(params.is_null() ? nlohmann::json::object() : params) {
  if (!given_.is_object()) fail("params must be a JSON object");
}

void ParamReader::fail(const std::string& what) const {
  throw Error(Errc::InvalidParameter, family_ + ": " + what);
}

bool ParamReader::has(const std::string& key) const { return given_.contains(key); }

double ParamReader::number(const std::string& key, double fallback) {
  double v = fallback;
  if (given_.contains(key)) {
    if (!given_[key].is_number()) fail("parameter '" + key + "' must be a number");
    v = given_[key].get<double>();
  }
  if (!std::isfinite(v)) fail("parameter '" + key + "' must be finite");
  resolved_[key] = v;
  return v;
}

double ParamReader::required_number(const std::string& key) {
  if (!given_.contains(key)) fail("missing parameter '" + key + "'");
  return number(key, 0.0);
}

int ParamReader::integer(const std::string& key, int fallback) {
  int v = fallback;
  if (given_.contains(key)) {
    const auto& j = given_[key];
    if (!j.is_number() || std::floor(j.get<double>()) != j.get<double>()) {
      fail("parameter '" + key + "' must be an integer");
    }
    v = static_cast<int>(j.get<double>());
  }
  resolved_[key] = v;
  return v;
}

std::string ParamReader::text(const std::string& key, const std::string& fallback) {
  std::string v = fallback;
  if (given_.contains(key)) {
    if (!given_[key].is_string()) fail("parameter '" + key + "' must be a string");
    v = given_[key].get<std::string>();
  }
  resolved_[key] = v;
  return v;
}

ScalarFunction ParamReader::function(const std::string& key, const nlohmann::json& fallback) {
  const nlohmann::json& src = given_.contains(key) ? given_[key] : fallback;
  try {
    ScalarFunction f = ScalarFunction::from_json(src);
    resolved_[key] = f.to_json();
    return f;
  } catch (const Error& e) {
    fail("parameter '" + key + "': " + e.what());
  }
}

nlohmann::json ParamReader::finish() {
  for (auto it = given_.begin(); it != given_.end(); ++it) {
    if (!resolved_.contains(it.key())) fail("unknown parameter '" + it.key() + "'");
  }
  return resolved_;
}

namespace {

constexpr int kGrid = 256;

Site rank_pos(const Configuration& y, std::size_t j) { return y[index_of_rank(y, j)].position; }

double absdist(Site a, Site b) { return static_cast<double>(a > b ? a - b : b - a); }

// 1 * max(x + offset, 1)^(-gamma)
ScalarFunction power_kernel(double gamma, double offset) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "power:1,%.17g,%.17g", gamma, offset);
  return ScalarFunction::parse(buf);
}

bool is_extreme(const Configuration& y, std::size_t idx) { return idx == 0 || idx + 1 == y.count(); }

void require_nonnegative(ParamReader& pr, const ScalarFunction& f, const std::string& name) {
  if (f.range_on(0, kGrid).first < 0) pr.fail(name + " must be nonnegative");
}

double require_summable(ParamReader& pr, const ScalarFunction& f, const std::string& name,
                        double from = 0.0, double step = 1.0) {
  auto b = f.tail_bound(from, step);
  if (!b) pr.fail(name + " must be summable");
  return *b;
}

// h mapped into (0, 1) on a wide grid of arguments.
void require_unit_interval(ParamReader& pr, const ScalarFunction& h, const std::string& name) {
  for (int x = -kGrid; x <= 4 * kGrid; ++x) {
    double v = h(x);
    if (!(v > 0.0 && v < 1.0)) pr.fail(name + " must take values in (0, 1)");
  }
}

template <class Base>
class Family : public Base {
 public:
  Family(std::string id, nlohmann::json params) : id_(std::move(id)), params_(std::move(params)) {}
  std::string id() const override { return id_; }
  nlohmann::json params() const override { return params_; }

 private:
  std::string id_;
  nlohmann::json params_;
};

// ---------------------------------------------------------------- walks ---

class ConstSymmetric final : public Family<WalkFamily> {
 public:
  ConstSymmetric(nlohmann::json p, double plus, double minus)
      : Family("const_symmetric", std::move(p)), plus_(plus), minus_(minus) {}
  RwRates rw_rates_as(const Configuration&, std::size_t, Sign as) const override {
    double v = as == Sign::plus ? plus_ : minus_;
    return {v, v};
  }
  bool zero_drift() const override { return true; }

 private:
  double plus_, minus_;
};

class ZeroDriftPower final : public Family<WalkFamily> {
 public:
  ZeroDriftPower(nlohmann::json p, double alpha, double gamma, double scale)
      : Family("zero_drift_power", std::move(p)),
        amp_(scale * alpha), kernel_(power_kernel(gamma, 1.0)) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign) const override {
    double v = amp_ * distance_sum(y, idx, kernel_, true);
    return {v, v};
  }
  bool zero_drift() const override { return true; }

 private:
  double amp_;
  ScalarFunction kernel_;
};

class ConstDrift final : public Family<WalkFamily> {
 public:
  ConstDrift(nlohmann::json p, double f, double g, double beta, double gamma, bool long_range,
             bool sum_norm, double scale)
      : Family("const_drift", std::move(p)),
        f_(f), g_(g), beta_(beta), gamma_(gamma), long_range_(long_range), sum_norm_(sum_norm),
        scale_(scale) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign) const override {
    double f = f_;
    double g = g_;
    if (long_range_) {
      f = beta_;
      g = 0.0;
      Site at = y[idx].position;
      for (std::size_t i = 0; i < y.count(); ++i) {
        if (i == idx) continue;
        double w = std::pow(absdist(at, y[i].position), -gamma_);
        if (y[i].position > at) f += w; else g += w;
      }
    }
    double z = sum_norm_ ? f + g : f - g;
    return {scale_ * f / z, scale_ * g / z};
  }

 private:
  double f_, g_, beta_, gamma_;
  bool long_range_, sum_norm_;
  double scale_;
};

class RankGH final : public Family<WalkFamily> {
 public:
  RankGH(nlohmann::json p, ScalarFunction g, ScalarFunction h, ScalarFunction gm, ScalarFunction hm,
         double scale)
      : Family("rank_g_h", std::move(p)), g_(g), h_(h), gm_(gm), hm_(hm), scale_(scale) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign) const override {
    std::size_t j = rank_of(y, idx);
    double d = absdist(rank_pos(y, 1), y[idx].position);
    double v = y.charge() > 0 ? g_(j) * h_(d) : gm_(j) * hm_(d);
    return {scale_ * v, scale_ * (1.0 - v)};
  }

 private:
  ScalarFunction g_, h_, gm_, hm_;
  double scale_;
};

class RankPotential final : public Family<WalkFamily> {
 public:
  RankPotential(nlohmann::json p, double alpha, double gamma, ScalarFunction psi, int ell_sign,
                double scale)
      : Family("rank_potential", std::move(p)),
        alpha_(alpha), gamma_(gamma), psi_(psi), ell_sign_(ell_sign), scale_(scale) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign) const override {
    const std::size_t n = y.count();
    const std::size_t j = rank_of(y, idx);
    const double ch = y.charge();
    double right_part = 0.0;  // j < j' <= n
    double left_part = 0.0;   // 1 <= j' < j
    for (std::size_t jp = 1; jp <= n; ++jp) {
      if (jp == j) continue;
      Site anchor = rank_pos(y, jp);
      double inner = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == idx) continue;
        inner += psi_(absdist(anchor, y[i].position));
      }
      double w = std::pow(static_cast<double>(jp), -gamma_) * inner;
      if (jp > j) right_part += w; else left_part += w;
    }
    return {scale_ * (alpha_ - ch * right_part), scale_ * (alpha_ + ell_sign_ * ch * left_part)};
  }

 private:
  double alpha_, gamma_;
  ScalarFunction psi_;
  int ell_sign_;
  double scale_;
};

// Shared helper for h-of-potential families: h for charge +1 and h_minus
// (default 1 - h) for charge -1.
struct ChargedH {
  ScalarFunction h;
  std::optional<ScalarFunction> h_minus;
  double operator()(int charge, double x) const {
    if (charge > 0) return h(x);
    return h_minus ? (*h_minus)(x) : 1.0 - h(x);
  }
};

ChargedH read_charged_h(ParamReader& pr) {
  ChargedH out{pr.function("h", "logistic:0.1,0.9,1,0"), std::nullopt};
  require_unit_interval(pr, out.h, "h");
  if (!out.h.nondecreasing_on(-kGrid, 4 * kGrid)) pr.fail("h must be nondecreasing");
  if (pr.has("h_minus")) {
    out.h_minus = pr.function("h_minus", 0.5);
    require_unit_interval(pr, *out.h_minus, "h_minus");
    if (!out.h_minus->nonincreasing_on(-kGrid, 4 * kGrid)) pr.fail("h_minus must be nonincreasing");
  }
  return out;
}

class DistPotential final : public Family<WalkFamily> {
 public:
  DistPotential(nlohmann::json p, ChargedH h, ScalarFunction phi, double scale)
      : Family("dist_potential", std::move(p)), h_(std::move(h)), phi_(phi), scale_(scale) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign) const override {
    std::size_t j = rank_of(y, idx);
    double s = 0.0;
    for (std::size_t jp = 1; jp <= j; ++jp) s += phi_(absdist(y[idx].position, rank_pos(y, jp)));
    double v = h_(y.charge(), s);
    return {scale_ * v, scale_ * (1.0 - v)};
  }

 private:
  ChargedH h_;
  ScalarFunction phi_;
  double scale_;
};

class DistGap final : public Family<WalkFamily> {
 public:
  DistGap(nlohmann::json p, ChargedH h, ScalarFunction g, double scale)
      : Family("dist_gap", std::move(p)), h_(std::move(h)), g_(g), scale_(scale) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign) const override {
    std::size_t j = rank_of(y, idx);
    double s = 0.0;
    for (std::size_t jp = 1; jp < j; ++jp) s += g_(gap_of_rank(y, jp));
    double v = h_(y.charge(), s);
    return {scale_ * v, scale_ * (1.0 - v)};
  }

 private:
  ChargedH h_;
  ScalarFunction g_;
  double scale_;
};

class DistPullFirst final : public Family<WalkFamily> {
 public:
  DistPullFirst(nlohmann::json p, double alpha, ScalarFunction psi, double scale)
      : Family("dist_pull_first", std::move(p)), alpha_(alpha), psi_(psi), scale_(scale) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign) const override {
    std::size_t j = rank_of(y, idx);
    Site first = rank_pos(y, 1);
    double s = 0.0;
    for (std::size_t jp = 2; jp <= j; ++jp) s += psi_(absdist(rank_pos(y, jp), first));
    double ch = y.charge();
    return {scale_ * (alpha_ + ch * s), scale_ * (alpha_ - ch * s)};
  }

 private:
  double alpha_;
  ScalarFunction psi_;
  double scale_;
};

class DistGapRank final : public Family<WalkFamily> {
 public:
  DistGapRank(nlohmann::json p, ScalarFunction g_gap, ScalarFunction g_rank, double scale)
      : Family("dist_gap_rank", std::move(p)), g_gap_(g_gap), g_rank_(g_rank), scale_(scale) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign as) const override {
    std::size_t j = rank_of(y, idx);
    bool plus_charge = y.charge() > 0;
    double r = 0.5;
    if (as == Sign::plus) {
      r += plus_charge ? g(y, j - 1) : -g(y, j);
    } else {
      r += plus_charge ? g(y, j) : -g(y, j - 1);
    }
    return {scale_ * r, scale_ * (1.0 - r)};
  }

 private:
  double g(const Configuration& y, std::size_t j) const {
    double gap = gap_of_rank(y, j);
    if (std::isinf(gap)) return 0.0;
    return g_gap_(gap) * g_rank_(static_cast<double>(j));
  }
  ScalarFunction g_gap_, g_rank_;
  double scale_;
};

class DistAttractRank final : public Family<WalkFamily> {
 public:
  DistAttractRank(nlohmann::json p, ScalarFunction psi, double scale)
      : Family("dist_attract_rank", std::move(p)), psi_(psi), scale_(scale) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign as) const override {
    double r = 0.5;
    if (!is_extreme(y, idx)) {
      std::size_t j = rank_of(y, idx);
      int ch = y.charge();
      std::size_t offset = as == Sign::plus ? static_cast<std::size_t>((1 - ch) / 2)
                                            : static_cast<std::size_t>((1 + ch) / 2);
      // The ch factor mirrors the charge +1 formula; without it charge -1 repels.
      double s = 0.0;
      for (std::size_t jp = j + offset + 1; jp <= y.count(); ++jp) {
        s += psi_(absdist(y[idx].position, rank_pos(y, jp)));
      }
      r += ch * s;
    }
    return {scale_ * r, scale_ * (1.0 - r)};
  }

 private:
  ScalarFunction psi_;
  double scale_;
};

class DistAttractMid final : public Family<WalkFamily> {
 public:
  DistAttractMid(nlohmann::json p, ScalarFunction psi, double scale)
      : Family("dist_attract_mid", std::move(p)), psi_(psi), scale_(scale) {}
  RwRates rw_rates_as(const Configuration& y, std::size_t idx, Sign as) const override {
    std::size_t j = rank_of(y, idx);
    bool plus_charge = y.charge() > 0;
    double r = 0.5;
    // Midpoint between ranks j - 1 and j ("lower") or j and j + 1 ("upper").
    double lower = mid_sum(y, idx, j - 1, j);
    double upper = mid_sum(y, idx, j, j + 1);
    if (as == Sign::plus) {
      r += plus_charge ? lower : -upper;
    } else {
      r += plus_charge ? upper : -lower;
    }
    return {scale_ * r, scale_ * (1.0 - r)};
  }

 private:
  double mid_sum(const Configuration& y, std::size_t idx, std::size_t ja, std::size_t jb) const {
    if (ja == 0 || jb > y.count()) return 0.0;  // midpoint at infinity
    double mid = 0.5 * static_cast<double>(rank_pos(y, ja) + rank_pos(y, jb));
    double s = 0.0;
    for (std::size_t i = 0; i < y.count(); ++i) {
      if (i == idx) continue;
      s += psi_(std::abs(mid - static_cast<double>(y[i].position)));
    }
    return s;
  }
  ScalarFunction psi_;
  double scale_;
};

// ------------------------------------------------------------- branching ---

class ConstBranch final : public Family<BranchFamily> {
 public:
  ConstBranch(nlohmann::json p, double plus, double minus)
      : Family("const_branch", std::move(p)), plus_(plus), minus_(minus) {}
  double branch_rate_as(const Configuration&, std::size_t, Sign as) const override {
    return as == Sign::plus ? plus_ : minus_;
  }

 private:
  double plus_, minus_;
};

bool is_lone(const Configuration& y, std::size_t i, int radius) {
  Site at = y[i].position;
  return y.count_in(at - radius, at + radius) == 1;
}

class RangeSum final : public Family<BranchFamily> {
 public:
  RangeSum(nlohmann::json p, double b1, double b2, int l1, ScalarFunction dist, bool lone, int l2)
      : Family("range_sum", std::move(p)), b1_(b1), b2_(b2), l1_(l1), dist_(dist), lone_(lone),
        l2_(l2) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign) const override {
    Site at = y[idx].position;
    double s = 0.0;
    for (std::size_t i = 0; i < y.count(); ++i) {
      double d = absdist(at, y[i].position);
      if (l1_ >= 0 && d > l1_) continue;
      if (lone_ && !is_lone(y, i, l2_)) continue;
      s += dist_(d);
    }
    return b1_ + b2_ * s;
  }

 private:
  double b1_, b2_;
  int l1_;
  ScalarFunction dist_;
  bool lone_;
  int l2_;
};

class FiniteRangeLone final : public Family<BranchFamily> {
 public:
  FiniteRangeLone(nlohmann::json p, double b1, double b2)
      : Family("finite_range_lone", std::move(p)), b1_(b1), b2_(b2) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign) const override {
    return b1_ + b2_ * (is_lone(y, idx, 1) ? 1.0 : 0.0);
  }

 private:
  double b1_, b2_;
};

class FiniteRangeExp final : public Family<BranchFamily> {
 public:
  FiniteRangeExp(nlohmann::json p, int range, ScalarFunction fs, ScalarFunction fa)
      : Family("finite_range_exp", std::move(p)), range_(range), fs_(fs), fa_(fa) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign as) const override {
    Site at = y[idx].position;
    double s = 0.0;
    for (std::size_t i = 0; i < y.count(); ++i) {
      if (i == idx) continue;
      double d = absdist(at, y[i].position);
      if (d > range_) continue;
      s += fs_(d) * value(y[i].sign) + fa_(d);
    }
    return std::exp(value(as) * s);
  }

 private:
  int range_;
  ScalarFunction fs_, fa_;
};

class HolderSum final : public Family<BranchFamily> {
 public:
  HolderSum(nlohmann::json p, double b1, double b2, double expo, ScalarFunction psi, bool signed_w)
      : Family("holder_sum", std::move(p)), b1_(b1), b2_(b2), expo_(expo), psi_(psi),
        signed_(signed_w) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign as) const override {
    Site at = y[idx].position;
    double s = 0.0;
    for (std::size_t i = 0; i < y.count(); ++i) {
      double w = signed_ ? (i == idx ? 1.0 : value(y[i].sign) * value(as)) : 1.0;
      s += psi_(absdist(at, y[i].position)) * w;
    }
    return b1_ + b2_ * std::pow(std::abs(s), expo_);
  }

 private:
  double b1_, b2_, expo_;
  ScalarFunction psi_;
  bool signed_;
};

class PowerExponent final : public Family<BranchFamily> {
 public:
  PowerExponent(nlohmann::json p, double beta, double b1, double b2, ScalarFunction psi,
                ScalarFunction e)
      : Family("power_exponent", std::move(p)), beta_(beta), b1_(b1), b2_(b2), psi_(psi), e_(e) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign) const override {
    double base = 1.0 + distance_sum(y, idx, psi_, true);
    double lambda = distance_sum(y, idx, e_, true);
    return beta_ * std::pow(base, -b1_ - b2_ * lambda);
  }

 private:
  double beta_, b1_, b2_;
  ScalarFunction psi_, e_;
};

class RankSum final : public Family<BranchFamily> {
 public:
  RankSum(nlohmann::json p, double beta, double b1, double b2, ScalarFunction g1d,
          ScalarFunction g1r, ScalarFunction g2d, ScalarFunction g2r)
      : Family("rank_sum", std::move(p)), beta_(beta), b1_(b1), b2_(b2), g1d_(g1d), g1r_(g1r),
        g2d_(g2d), g2r_(g2r) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign) const override {
    std::size_t j = rank_of(y, idx);
    Site at = y[idx].position;
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t jp = 1; jp <= y.count(); ++jp) {
      double d = absdist(at, rank_pos(y, jp));
      double m = static_cast<double>(jp);
      if (jp <= j) s1 += g1d_(d) * g1r_(m);
      if (jp >= j) s2 += g2d_(d) * g2r_(m);
    }
    return beta_ + b1_ * s1 + b2_ * s2;
  }

 private:
  double beta_, b1_, b2_;
  ScalarFunction g1d_, g1r_, g2d_, g2r_;
};

class UnboundedPsi final : public Family<BranchFamily> {
 public:
  UnboundedPsi(nlohmann::json p, ScalarFunction psi, double f0, double f1, int range)
      : Family("unbounded_psi", std::move(p)), psi_(psi), f0_(f0), f1_(f1), range_(range) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign) const override {
    Site at = y[idx].position;
    double s = 0.0;
    for (std::size_t i = 0; i < y.count(); ++i) {
      Site pos = y[i].position;
      double neighbours = static_cast<double>(y.count_in(pos - range_, pos + range_) - 1);
      s += psi_(absdist(at, pos)) * (f0_ + f1_ * neighbours);
    }
    return s;
  }

 private:
  ScalarFunction psi_;
  double f0_, f1_;
  int range_;
};

class OneSidedPotential final : public Family<BranchFamily> {
 public:
  OneSidedPotential(nlohmann::json p, ScalarFunction h, ScalarFunction phi)
      : Family("one_sided_potential", std::move(p)), h_(h), phi_(phi) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign) const override {
    std::size_t j = rank_of(y, idx);
    double s = 0.0;
    for (std::size_t jp = 1; jp <= j; ++jp) s += phi_(absdist(y[idx].position, rank_pos(y, jp)));
    return h_(s);
  }

 private:
  ScalarFunction h_, phi_;
};

class SignPower final : public Family<BranchFamily> {
 public:
  SignPower(nlohmann::json p, double beta, ScalarFunction psi, ScalarFunction e)
      : Family("sign_power", std::move(p)), beta_(beta), psi_(psi), e_(e) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign as) const override {
    double base = distance_sum(y, idx, psi_, true);
    double lambda = y.charge() * distance_sum(y, idx, e_, true);
    return beta_ * std::pow(base, -value(as) * lambda);
  }

 private:
  double beta_;
  ScalarFunction psi_, e_;
};

class RankLog final : public Family<BranchFamily> {
 public:
  RankLog(nlohmann::json p, double beta, double b1, double b2, ScalarFunction g1,
          ScalarFunction g2, ScalarFunction phi)
      : Family("rank_log", std::move(p)), beta_(beta), b1_(b1), b2_(b2), g1_(g1), g2_(g2),
        phi_(phi) {}
  double branch_rate_as(const Configuration& y, std::size_t idx, Sign) const override {
    std::size_t j = rank_of(y, idx);
    double s = 0.0;
    for (std::size_t jp = 1; jp <= j; ++jp) s += phi_(absdist(y[idx].position, rank_pos(y, jp)));
    double m = static_cast<double>(j);
    return beta_ + b1_ * g1_(m) + b2_ * g2_(m) * s;
  }

 private:
  double beta_, b1_, b2_;
  ScalarFunction g1_, g2_, phi_;
};

// ------------------------------------------------------------ long range ---

class LongRangeExpPsi final : public Family<LongRangeFamily> {
 public:
  LongRangeExpPsi(nlohmann::json p, double b1, double b2, int window, double f_occ, double f_empty,
                  double psi_amp, double psi_l_power, ScalarFunction psi_dist, int max_range)
      : Family("long_range_exp_psi", std::move(p)), b1_(b1), b2_(b2), window_(window),
        f_occ_(f_occ), f_empty_(f_empty), psi_amp_(psi_amp), psi_l_power_(psi_l_power),
        psi_dist_(psi_dist), max_range_(max_range) {}
  int max_range() const override { return max_range_; }
  double long_branch_rate(const Configuration& y, std::size_t idx, int l) const override {
    if (l < 2 || l > max_range_) return 0.0;
    Site at = y[idx].position;
    double occupied = static_cast<double>(y.count_in(at - window_, at + window_));
    double local = f_occ_ * occupied + f_empty_ * (2.0 * window_ + 1.0 - occupied);
    double far = psi_amp_ * std::pow(static_cast<double>(l), -psi_l_power_) *
                 distance_sum(y, idx, psi_dist_, true);
    return b1_ * std::exp(-static_cast<double>(l)) * local + b2_ * far;
  }

 private:
  double b1_, b2_;
  int window_;
  double f_occ_, f_empty_, psi_amp_, psi_l_power_;
  ScalarFunction psi_dist_;
  int max_range_;
};

// ------------------------------------------------------------- factories ---

std::shared_ptr<const WalkFamily> make_const_symmetric(const nlohmann::json& params) {
  ParamReader pr("const_symmetric", params);
  double rate = pr.number("rate", 0.25);
  double minus = pr.number("rate_minus", rate);
  if (rate < 0 || minus < 0) pr.fail("rates must be nonnegative");
  return std::make_shared<ConstSymmetric>(pr.finish(), rate, minus);
}

std::shared_ptr<const WalkFamily> make_zero_drift_power(const nlohmann::json& params) {
  ParamReader pr("zero_drift_power", params);
  double alpha = pr.number("alpha", 0.05);
  double gamma = pr.number("gamma", 2.0);
  double scale = pr.number("scale", 1.0);
  if (!(alpha > 0)) pr.fail("alpha must be > 0");
  if (!(gamma > 1)) pr.fail("gamma must be > 1");
  if (!(scale > 0)) pr.fail("scale must be > 0");
  return std::make_shared<ZeroDriftPower>(pr.finish(), alpha, gamma, scale);
}

std::shared_ptr<const WalkFamily> make_const_drift(const nlohmann::json& params) {
  ParamReader pr("const_drift", params);
  std::string norm = pr.text("normalization", "difference");
  if (norm != "difference" && norm != "sum") pr.fail("normalization must be 'difference' or 'sum'");
  double scale = pr.number("scale", 1.0);
  if (!(scale > 0)) pr.fail("scale must be > 0");
  bool long_range = pr.has("gamma") || pr.has("beta");
  double f = 0, g = 0, beta = 0, gamma = 0;
  if (long_range) {
    beta = pr.number("beta", 2.0);
    gamma = pr.number("gamma", 2.0);
    if (!(gamma > 1)) pr.fail("gamma must be > 1");
    // sup g <= zeta(gamma) must stay below inf f = beta.
    double zeta = *power_kernel(gamma, 0.0).tail_bound(1.0);
    if (!(beta > zeta)) pr.fail("beta must exceed the bound on g");
  } else {
    f = pr.number("f", 0.6);
    g = pr.number("g", 0.2);
    if (!(g >= 0 && f > g)) pr.fail("need f > g >= 0");
  }
  return std::make_shared<ConstDrift>(pr.finish(), f, g, beta, gamma, long_range, norm == "sum",
                                      scale);
}

std::shared_ptr<const WalkFamily> make_rank_g_h(const nlohmann::json& params) {
  ParamReader pr("rank_g_h", params);
  ScalarFunction g = pr.function("g", 0.5);
  ScalarFunction h = pr.function("h", 0.5);
  ScalarFunction gm = pr.has("g_minus") ? pr.function("g_minus", 0.5) : g;
  ScalarFunction hm = pr.has("h_minus") ? pr.function("h_minus", 0.5) : h;
  double scale = pr.number("scale", 1.0);
  if (!(scale > 0)) pr.fail("scale must be > 0");
  auto in_unit = [&](const ScalarFunction& f, int lo, const char* name) {
    auto [mn, mx] = f.range_on(lo, kGrid);
    if (!(mn > 0 && mx < 1)) pr.fail(std::string(name) + " must take values in (0, 1)");
  };
  in_unit(g, 1, "g");
  in_unit(h, 0, "h");
  in_unit(gm, 1, "g_minus");
  in_unit(hm, 0, "h_minus");
  if (!g.nondecreasing_on(1, kGrid) || !h.nondecreasing_on(0, kGrid)) {
    pr.fail("g and h must be nondecreasing for charge +1");
  }
  if (!gm.nonincreasing_on(1, kGrid) || !hm.nonincreasing_on(0, kGrid)) {
    pr.fail("g_minus and h_minus must be nonincreasing for charge -1");
  }
  return std::make_shared<RankGH>(pr.finish(), g, h, gm, hm, scale);
}

std::shared_ptr<const WalkFamily> make_rank_potential(const nlohmann::json& params) {
  ParamReader pr("rank_potential", params);
  double alpha = pr.number("alpha", 0.25);
  double gamma = pr.number("gamma", 2.0);
  ScalarFunction psi = pr.function("psi", "geom:0.02,0.5");
  int ell_sign = pr.integer("ell_sign", 1);
  double scale = pr.number("scale", 1.0);
  if (ell_sign != 1 && ell_sign != -1) pr.fail("ell_sign must be +1 or -1");
  if (!(gamma > 1)) pr.fail("gamma must be > 1");
  if (!(scale > 0)) pr.fail("scale must be > 0");
  require_nonnegative(pr, psi, "psi");
  double psi_sum = psi(0) + 2.0 * require_summable(pr, psi, "psi", 1.0);
  double zeta = *power_kernel(gamma, 0.0).tail_bound(1.0);
  if (!(alpha > zeta * psi_sum)) pr.fail("alpha too small to keep the rates positive");
  return std::make_shared<RankPotential>(pr.finish(), alpha, gamma, psi, ell_sign, scale);
}

std::shared_ptr<const WalkFamily> make_dist_potential(const nlohmann::json& params) {
  ParamReader pr("dist_potential", params);
  ChargedH h = read_charged_h(pr);
  ScalarFunction phi = pr.function("phi", "power:1,-1,1");
  double scale = pr.number("scale", 1.0);
  if (!(scale > 0)) pr.fail("scale must be > 0");
  if (!phi.nondecreasing_on(0, kGrid)) pr.fail("phi must be nondecreasing");
  return std::make_shared<DistPotential>(pr.finish(), std::move(h), phi, scale);
}

std::shared_ptr<const WalkFamily> make_dist_gap(const nlohmann::json& params) {
  ParamReader pr("dist_gap", params);
  ChargedH h = read_charged_h(pr);
  ScalarFunction g = pr.function("g", "power:1,1");
  double scale = pr.number("scale", 1.0);
  if (!(scale > 0)) pr.fail("scale must be > 0");
  return std::make_shared<DistGap>(pr.finish(), std::move(h), g, scale);
}

std::shared_ptr<const WalkFamily> make_dist_pull_first(const nlohmann::json& params) {
  ParamReader pr("dist_pull_first", params);
  double alpha = pr.number("alpha", 0.25);
  ScalarFunction psi = pr.function("psi", "power:0.1,2");
  double scale = pr.number("scale", 1.0);
  if (!(scale > 0)) pr.fail("scale must be > 0");
  require_nonnegative(pr, psi, "psi");
  double bound = require_summable(pr, psi, "psi", 1.0);
  if (!(alpha > bound)) pr.fail("alpha too small to keep the rates positive");
  return std::make_shared<DistPullFirst>(pr.finish(), alpha, psi, scale);
}

std::shared_ptr<const WalkFamily> make_dist_gap_rank(const nlohmann::json& params) {
  ParamReader pr("dist_gap_rank", params);
  ScalarFunction g_gap = pr.function("g_gap", 1.0);
  ScalarFunction g_rank = pr.function("g_rank", "power:0.4,1");
  double scale = pr.number("scale", 1.0);
  if (!(scale > 0)) pr.fail("scale must be > 0");
  for (int l = 1; l <= kGrid; ++l) {
    for (int n = 1; n <= kGrid; n += (n < 16 ? 1 : 15)) {
      double v = g_gap(l) * g_rank(n);
      if (!(v > 0 && v < 0.5)) pr.fail("g(L, n) must take values in (0, 1/2)");
    }
  }
  return std::make_shared<DistGapRank>(pr.finish(), g_gap, g_rank, scale);
}

std::shared_ptr<const WalkFamily> make_dist_attract_rank(const nlohmann::json& params) {
  ParamReader pr("dist_attract_rank", params);
  ScalarFunction psi = pr.function("psi", "geom:0.2,0.5");
  double scale = pr.number("scale", 1.0);
  if (!(scale > 0)) pr.fail("scale must be > 0");
  require_nonnegative(pr, psi, "psi");
  if (!psi.nonincreasing_on(0, kGrid)) pr.fail("psi must be nonincreasing");
  if (!(require_summable(pr, psi, "psi", 1.0) < 0.5)) pr.fail("sum of psi must be < 1/2");
  return std::make_shared<DistAttractRank>(pr.finish(), psi, scale);
}

std::shared_ptr<const WalkFamily> make_dist_attract_mid(const nlohmann::json& params) {
  ParamReader pr("dist_attract_mid", params);
  ScalarFunction psi = pr.function("psi", "geom:0.05,0.5");
  double scale = pr.number("scale", 1.0);
  if (!(scale > 0)) pr.fail("scale must be > 0");
  require_nonnegative(pr, psi, "psi");
  // Each distance to the midpoint is attained by at most two sites.
  double bound = psi(0) + 2.0 * require_summable(pr, psi, "psi", 0.5, 0.5);
  if (!(bound < 0.5)) pr.fail("psi too large: the rates would leave (0, 1)");
  return std::make_shared<DistAttractMid>(pr.finish(), psi, scale);
}

std::shared_ptr<const BranchFamily> make_const_branch(const nlohmann::json& params) {
  ParamReader pr("const_branch", params);
  double beta = pr.number("beta", 1.0);
  double minus = pr.number("beta_minus", beta);
  if (!(beta > 0 && minus > 0)) pr.fail("branching rates must be > 0");
  return std::make_shared<ConstBranch>(pr.finish(), beta, minus);
}

std::shared_ptr<const BranchFamily> make_range_sum(const nlohmann::json& params) {
  ParamReader pr("range_sum", params);
  double b1 = pr.number("beta1", 0.5);
  double b2 = pr.number("beta2", 0.5);
  int l1 = pr.integer("L1", 2);
  ScalarFunction dist = pr.function("f", 1.0);
  std::string weight = pr.text("weight", "occupied");
  int l2 = pr.integer("L2", 1);
  if (!(b1 > 0 && b2 >= 0)) pr.fail("need beta1 > 0 and beta2 >= 0");
  if (weight != "occupied" && weight != "lone") pr.fail("weight must be 'occupied' or 'lone'");
  if (l2 < 0) pr.fail("L2 must be >= 0");
  require_nonnegative(pr, dist, "f");
  if (l1 < 0) require_summable(pr, dist, "f (infinite range)");
  return std::make_shared<RangeSum>(pr.finish(), b1, b2, l1, dist, weight == "lone", l2);
}

std::shared_ptr<const BranchFamily> make_finite_range_lone(const nlohmann::json& params) {
  ParamReader pr("finite_range_lone", params);
  double b1 = pr.number("beta1", 0.5);
  double b2 = pr.number("beta2", 0.5);
  if (!(b1 > 0 && b2 >= 0)) pr.fail("need beta1 > 0 and beta2 >= 0");
  return std::make_shared<FiniteRangeLone>(pr.finish(), b1, b2);
}

std::shared_ptr<const BranchFamily> make_finite_range_exp(const nlohmann::json& params) {
  ParamReader pr("finite_range_exp", params);
  int range = pr.integer("L", 2);
  ScalarFunction fs = pr.function("f_signed", 0.1);
  ScalarFunction fa = pr.function("f_abs", 0.0);
  if (range < 0) pr.fail("L must be >= 0");
  return std::make_shared<FiniteRangeExp>(pr.finish(), range, fs, fa);
}

std::shared_ptr<const BranchFamily> make_holder_sum(const nlohmann::json& params) {
  ParamReader pr("holder_sum", params);
  double b1 = pr.number("beta1", 0.5);
  double b2 = pr.number("beta2", 0.5);
  double expo = pr.number("holder_exponent", 0.5);
  ScalarFunction psi = pr.function("psi", "power:1,2,1");
  std::string weight = pr.text("weight", "occupied");
  if (!(b1 > 0 && b2 >= 0)) pr.fail("need beta1 > 0 and beta2 >= 0");
  if (!(expo > 0 && expo <= 1)) pr.fail("holder_exponent must lie in (0, 1]");
  if (weight != "occupied" && weight != "signed") pr.fail("weight must be 'occupied' or 'signed'");
  require_summable(pr, psi, "psi");
  return std::make_shared<HolderSum>(pr.finish(), b1, b2, expo, psi, weight == "signed");
}

std::shared_ptr<const BranchFamily> make_power_exponent(const nlohmann::json& params) {
  ParamReader pr("power_exponent", params);
  double beta = pr.number("beta", 1.0);
  double b1 = pr.number("beta1", 0.5);
  double b2 = pr.number("beta2", 0.5);
  ScalarFunction psi = pr.function("psi", "power:1,2,1");
  ScalarFunction e = pr.function("E", "power:1,1,1");
  if (!(beta > 0 && b1 >= 0 && b2 >= 0)) pr.fail("need beta > 0, beta1 >= 0, beta2 >= 0");
  require_nonnegative(pr, psi, "psi");
  require_nonnegative(pr, e, "E");
  require_summable(pr, psi, "psi");
  if (!(std::abs(e(1e9)) < 1e-3 * std::max(1.0, std::abs(e(0))))) pr.fail("E must vanish at infinity");
  return std::make_shared<PowerExponent>(pr.finish(), beta, b1, b2, psi, e);
}

std::shared_ptr<const BranchFamily> make_rank_sum(const nlohmann::json& params) {
  ParamReader pr("rank_sum", params);
  double beta = pr.number("beta", 3.0);
  double b1 = pr.number("beta1", 0.5);
  double b2 = pr.number("beta2", 0.5);
  ScalarFunction g1d = pr.function("g1_dist", "delta:1,0");
  ScalarFunction g1r = pr.function("g1_rank", "power:1,2");
  ScalarFunction g2d = pr.function("g2_dist", "delta:1,0");
  ScalarFunction g2r = pr.function("g2_rank", "power:1,2");
  double worst = 0.0;
  for (auto [d, r, w] : {std::tuple{&g1d, &g1r, b1}, std::tuple{&g2d, &g2r, b2}}) {
    require_summable(pr, *d, "distance factor");
    auto [mn, mx] = d->range_on(0, 4 * kGrid);
    double sup = std::max(std::abs(mn), std::abs(mx));
    double rank_sum = require_summable(pr, *r, "rank factor", 1.0);
    worst += std::abs(w) * sup * rank_sum;
  }
  if (!(beta > worst)) pr.fail("beta too small to keep the rates positive");
  return std::make_shared<RankSum>(pr.finish(), beta, b1, b2, g1d, g1r, g2d, g2r);
}

std::shared_ptr<const BranchFamily> make_unbounded_psi(const nlohmann::json& params) {
  ParamReader pr("unbounded_psi", params);
  ScalarFunction psi = pr.function("psi", "iterlog:1,1");
  double f0 = pr.number("f0", 1.0);
  double f1 = pr.number("f1", 0.0);
  int range = pr.integer("L", 1);
  if (!(f0 > 0 && f1 >= 0)) pr.fail("need f0 > 0 and f1 >= 0");
  if (range < 0) pr.fail("L must be >= 0");
  require_nonnegative(pr, psi, "psi");
  if (!(psi(0) > 0)) pr.fail("psi(0) must be > 0");
  if (!psi.nonincreasing_on(0, 4 * kGrid)) pr.fail("psi must be nonincreasing");
  const int n_check = 1 << 16;
  double partial = 0.0;
  for (int n = 0; n <= n_check; ++n) partial += psi(n);
  if (!(partial <= std::log(static_cast<double>(n_check)))) {
    pr.fail("partial sums of psi exceed log(N) at the audit horizon");
  }
  return std::make_shared<UnboundedPsi>(pr.finish(), psi, f0, f1, range);
}

std::shared_ptr<const BranchFamily> make_one_sided_potential(const nlohmann::json& params) {
  ParamReader pr("one_sided_potential", params);
  ScalarFunction h = pr.function("h", "log:1,1");
  ScalarFunction phi = pr.function("phi", 1.0);
  if (phi(0) != 1.0) pr.fail("phi(0) must equal 1");
  if (!phi.nondecreasing_on(0, kGrid)) pr.fail("phi must be nondecreasing");
  bool up = h.nondecreasing_on(1, 4 * kGrid);
  bool down = h.nonincreasing_on(1, 4 * kGrid);
  if (!up && !down) pr.fail("h must be monotone");
  if (!(h.range_on(1, 4 * kGrid).first > 0)) pr.fail("h must be positive on [1, inf)");
  return std::make_shared<OneSidedPotential>(pr.finish(), h, phi);
}

std::shared_ptr<const BranchFamily> make_sign_power(const nlohmann::json& params) {
  ParamReader pr("sign_power", params);
  double beta = pr.number("beta", 1.0);
  ScalarFunction psi = pr.function("psi", "power:1,2,1");
  ScalarFunction e = pr.function("E", "power:0.1,2,1");
  if (!(beta > 0)) pr.fail("beta must be > 0");
  if (psi(0) != 1.0) pr.fail("psi(0) must equal 1");
  require_nonnegative(pr, psi, "psi");
  require_nonnegative(pr, e, "E");
  if (!(psi(1e9) < 1e-3) || !(e(1e9) < 1e-3)) pr.fail("psi and E must vanish at infinity");
  return std::make_shared<SignPower>(pr.finish(), beta, psi, e);
}

std::shared_ptr<const BranchFamily> make_rank_log(const nlohmann::json& params) {
  ParamReader pr("rank_log", params);
  double beta = pr.number("beta", 1.0);
  double b1 = pr.number("beta1", 0.1);
  double b2 = pr.number("beta2", 0.0);
  ScalarFunction g1 = pr.function("g1", "log:1,0");
  ScalarFunction g2 = pr.function("g2", 1.0);
  ScalarFunction phi = pr.function("phi", 0.0);
  if (!(beta > 0 && b1 >= 0 && b2 >= 0)) pr.fail("need beta > 0, beta1 >= 0, beta2 >= 0");
  require_nonnegative(pr, g1, "g1");
  require_nonnegative(pr, g2, "g2");
  require_nonnegative(pr, phi, "phi");
  if (!g2.nonincreasing_on(1, kGrid) || !phi.nonincreasing_on(0, kGrid)) {
    pr.fail("g2 and phi must be nonincreasing");
  }
  return std::make_shared<RankLog>(pr.finish(), beta, b1, b2, g1, g2, phi);
}

std::shared_ptr<const LongRangeFamily> make_long_range_exp_psi(const nlohmann::json& params) {
  ParamReader pr("long_range_exp_psi", params);
  double b1 = pr.number("beta1", 0.02);
  double b2 = pr.number("beta2", 0.5);
  int window = pr.integer("L", 1);
  double f_occ = pr.number("f_occupied", 1.0);
  double f_empty = pr.number("f_empty", 0.0);
  double psi_amp = pr.number("psi_amp", 1.0);
  double psi_l_power = pr.number("psi_l_power", 4.0);
  ScalarFunction psi_dist = pr.function("psi_dist", "geom:0.33333333333333331,0.5");
  int max_range = pr.integer("max_range", 8);
  if (!(b1 >= 0 && b2 >= 0)) pr.fail("beta1 and beta2 must be >= 0");
  if (window < 1) pr.fail("L must be >= 1");
  if (!(f_occ >= 0 && f_empty >= 0)) pr.fail("f must be nonnegative");
  if (!(psi_amp >= 0)) pr.fail("psi_amp must be >= 0");
  if (!(psi_l_power > 3)) pr.fail("psi_l_power must exceed 3");
  if (max_range < 2) pr.fail("max_range must be >= 2 (finite support is required)");
  require_nonnegative(pr, psi_dist, "psi_dist");
  require_summable(pr, psi_dist, "psi_dist");
  return std::make_shared<LongRangeExpPsi>(pr.finish(), b1, b2, window, f_occ, f_empty, psi_amp,
                                           psi_l_power, psi_dist, max_range);
}

struct Registry {
  std::mutex mu;
  std::map<std::string, WalkFactory> walks{
      {"const_symmetric", make_const_symmetric},
      {"zero_drift_power", make_zero_drift_power},
      {"const_drift", make_const_drift},
      {"rank_g_h", make_rank_g_h},
      {"rank_potential", make_rank_potential},
      {"dist_potential", make_dist_potential},
      {"dist_gap", make_dist_gap},
      {"dist_pull_first", make_dist_pull_first},
      {"dist_gap_rank", make_dist_gap_rank},
      {"dist_attract_rank", make_dist_attract_rank},
      {"dist_attract_mid", make_dist_attract_mid},
  };
  std::map<std::string, BranchFactory> branches{
      {"const_branch", make_const_branch},
      {"range_sum", make_range_sum},
      {"finite_range_lone", make_finite_range_lone},
      {"finite_range_exp", make_finite_range_exp},
      {"holder_sum", make_holder_sum},
      {"power_exponent", make_power_exponent},
      {"rank_sum", make_rank_sum},
      {"unbounded_psi", make_unbounded_psi},
      {"one_sided_potential", make_one_sided_potential},
      {"sign_power", make_sign_power},
      {"rank_log", make_rank_log},
  };
  std::map<std::string, LongRangeFactory> long_ranges{
      {"long_range_exp_psi", make_long_range_exp_psi},
  };
};

Registry& registry() {
  static Registry r;
  return r;
}

template <class Map>
typename Map::mapped_type lookup(Map& m, const std::string& id, const char* what) {
  std::lock_guard lock(registry().mu);
  auto it = m.find(id);
  if (it == m.end()) throw Error(Errc::UnknownFamily, std::string(what) + " family '" + id + "'");
  return it->second;
}

template <class Map>
std::vector<std::string> keys(Map& m) {
  std::lock_guard lock(registry().mu);
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

}  // namespace

std::shared_ptr<const WalkFamily> build_walk(const std::string& id, const nlohmann::json& params) {
  return lookup(registry().walks, id, "walk")(params);
}
std::shared_ptr<const BranchFamily> build_branch(const std::string& id,
                                                 const nlohmann::json& params) {
  return lookup(registry().branches, id, "branch")(params);
}
std::shared_ptr<const LongRangeFamily> build_long_range(const std::string& id,
                                                        const nlohmann::json& params) {
  return lookup(registry().long_ranges, id, "long-range")(params);
}

void register_walk(const std::string& id, WalkFactory factory) {
  std::lock_guard lock(registry().mu);
  registry().walks[id] = std::move(factory);
}
void register_branch(const std::string& id, BranchFactory factory) {
  std::lock_guard lock(registry().mu);
  registry().branches[id] = std::move(factory);
}
void register_long_range(const std::string& id, LongRangeFactory factory) {
  std::lock_guard lock(registry().mu);
  registry().long_ranges[id] = std::move(factory);
}

std::vector<std::string> walk_ids() { return keys(registry().walks); }
std::vector<std::string> branch_ids() { return keys(registry().branches); }
std::vector<std::string> long_range_ids() { return keys(registry().long_ranges); }

ModelSpec reference_model() {
  ModelSpec m;
  m.alpha1 = 1.0;
  m.alpha2 = 0.1;
  m.walk = build_walk("const_symmetric", {{"rate", 0.25}});
  m.branch = build_branch("const_branch", {{"beta", 1.0}});
  m.constants.s_lower = 0.5;
  m.constants.d_bar = 1.0;
  m.constants.B_n = ScalarFunction::constant(2.0);
  m.constants.D_bar = 1.0;
  m.constants.B_bar = 2.0;
  m.constants.a4 = A4Variant::a;
  return m;
}

}  // namespace dbarw
