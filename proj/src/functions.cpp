#include "dbarw/functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "dbarw/error.hpp"

namespace dbarw {

namespace {

std::vector<double> parse_numbers(const std::string& args, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(args);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidParameter, "bad number '" + item + "' in function '" + text + "'");
    }
  }
  return out;
}

void require_arity(const std::vector<double>& p, std::size_t lo, std::size_t hi,
                   const std::string& text) {
  if (p.size() < lo || p.size() > hi) {
    throw Error(Errc::InvalidParameter, "wrong number of arguments in function '" + text + "'");
  }
}

// exp^(k)(0): 0, 1, e, e^e, ...
double iterated_exp_zero(int k) {
  double v = 0.0;
  for (int i = 0; i < k; ++i) v = std::exp(v);
  return v;
}

double iterlog_raw(double a, int k, double x) {
  double denom = x;
  double cur = x;
  for (int i = 0; i < k; ++i) {
    cur = std::log(cur);
    denom *= cur;
  }
  return a / denom;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ScalarFunction ScalarFunction::constant(double v) {
  ScalarFunction f;
  f.kind_ = Kind::constant;
  f.p_ = {v};
  f.text_ = fmt(v);
  return f;
}

ScalarFunction ScalarFunction::parse(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(Errc::InvalidParameter, "function descriptor '" + text + "' lacks a kind prefix");
  }
  std::string name = text.substr(0, colon);
  ScalarFunction f;
  f.p_ = parse_numbers(text.substr(colon + 1), text);
  f.text_ = text;
  if (name == "const") {
    f.kind_ = Kind::constant;
    require_arity(f.p_, 1, 1, text);
  } else if (name == "power") {
    f.kind_ = Kind::power;
    require_arity(f.p_, 2, 3, text);
    if (f.p_.size() == 2) f.p_.push_back(0.0);
  } else if (name == "exp") {
    f.kind_ = Kind::exp;
    require_arity(f.p_, 2, 2, text);
  } else if (name == "geom") {
    f.kind_ = Kind::geom;
    require_arity(f.p_, 2, 2, text);
    if (f.p_[1] < 0) throw Error(Errc::InvalidParameter, "geom ratio must be >= 0 in '" + text + "'");
  } else if (name == "log") {
    f.kind_ = Kind::log;
    require_arity(f.p_, 1, 2, text);
    if (f.p_.size() == 1) f.p_.push_back(0.0);
  } else if (name == "logistic") {
    f.kind_ = Kind::logistic;
    require_arity(f.p_, 4, 4, text);
  } else if (name == "iterlog") {
    f.kind_ = Kind::iterlog;
    require_arity(f.p_, 2, 2, text);
    if (f.p_[1] < 0 || f.p_[1] > 4 || f.p_[1] != std::floor(f.p_[1])) {
      throw Error(Errc::InvalidParameter, "iterlog depth must be an integer in [0, 4]");
    }
    // Cache the first integer where every iterated log is positive, and the
    // value there (used as the flat plateau below it).
    double start = std::floor(iterated_exp_zero(static_cast<int>(f.p_[1]))) + 1.0;
    f.p_.push_back(start);
    f.p_.push_back(iterlog_raw(f.p_[0], static_cast<int>(f.p_[1]), start));
  } else if (name == "delta") {
    f.kind_ = Kind::delta;
    require_arity(f.p_, 2, 2, text);
  } else if (name == "step") {
    f.kind_ = Kind::step;
    require_arity(f.p_, 2, 2, text);
  } else {
    throw Error(Errc::InvalidParameter, "unknown function kind '" + name + "'");
  }
  return f;
}

ScalarFunction ScalarFunction::from_json(const nlohmann::json& j) {
  if (j.is_number()) return constant(j.get<double>());
  if (j.is_string()) return parse(j.get<std::string>());
  if (j.is_array()) {
    if (j.empty()) throw Error(Errc::InvalidParameter, "empty function table");
    ScalarFunction f;
    f.kind_ = Kind::table;
    f.p_.clear();
    for (const auto& v : j) {
      if (!v.is_number()) throw Error(Errc::InvalidParameter, "function table entries must be numbers");
      f.p_.push_back(v.get<double>());
    }
    f.text_ = j.dump();
    return f;
  }
  throw Error(Errc::InvalidParameter, "function must be a number, an array or a string");
}

nlohmann::json ScalarFunction::to_json() const {
  switch (kind_) {
    case Kind::constant: return p_[0];
    case Kind::table: return nlohmann::json(p_);
    default: return text_;
  }
}

std::string ScalarFunction::describe() const { return text_; }

double ScalarFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::constant:
      return p_[0];
    case Kind::table: {
      if (!(x >= 0)) return p_.front();
      double idx = std::floor(x);
      if (idx >= static_cast<double>(p_.size() - 1)) return p_.back();
      return p_[static_cast<std::size_t>(idx)];
    }
    case Kind::power:
      if (std::isinf(x)) return 0.0;
      return p_[0] * std::pow(std::max(x + p_[2], 1.0), -p_[1]);
    case Kind::exp:
      return p_[0] * std::exp(-p_[1] * x);
    case Kind::geom:
      return p_[0] * std::pow(p_[1], x);
    case Kind::log:
      return p_[0] * std::log(std::max(x, 1.0)) + p_[1];
    case Kind::logistic:
      return p_[0] + (p_[1] - p_[0]) / (1.0 + std::exp(-p_[2] * (x - p_[3])));
    case Kind::iterlog:
      if (std::isinf(x)) return 0.0;
      if (x < p_[2]) return p_[3];
      return iterlog_raw(p_[0], static_cast<int>(p_[1]), x);
    case Kind::delta:
      return x == p_[1] ? p_[0] : 0.0;
    case Kind::step:
      return x <= p_[1] ? p_[0] : 0.0;
  }
  return 0.0;
}

std::optional<double> ScalarFunction::tail_bound(double from, double step) const {
  if (!(step > 0)) return std::nullopt;
  switch (kind_) {
    case Kind::constant:
      if (p_[0] == 0.0) return 0.0;
      return std::nullopt;
    case Kind::table: {
      if (p_.back() != 0.0) return std::nullopt;
      double total = 0.0;
      for (double x = from; x < static_cast<double>(p_.size()); x += step) total += std::abs((*this)(x));
      return total;
    }
    case Kind::power: {
      double a = std::abs(p_[0]);
      if (a == 0.0) return 0.0;
      if (p_[1] <= 1.0) return std::nullopt;
      double total = 0.0;
      double x = from;
      // Flat part where x + o < 1.
      while (x + p_[2] < 1.0) {
        total += a;
        x += step;
      }
      total += a * std::pow(x + p_[2], -p_[1]);
      total += a * std::pow(x + p_[2], 1.0 - p_[1]) / ((p_[1] - 1.0) * step);
      return total;
    }
    case Kind::exp: {
      double a = std::abs(p_[0]);
      if (a == 0.0) return 0.0;
      if (p_[1] <= 0.0) return std::nullopt;
      return a * std::exp(-p_[1] * from) / (1.0 - std::exp(-p_[1] * step));
    }
    case Kind::geom: {
      double a = std::abs(p_[0]);
      if (a == 0.0) return 0.0;
      if (p_[1] >= 1.0) return std::nullopt;
      if (p_[1] == 0.0) return from <= 0.0 ? a : 0.0;
      return a * std::pow(p_[1], from) / (1.0 - std::pow(p_[1], step));
    }
    case Kind::log:
      if (p_[0] == 0.0 && p_[1] == 0.0) return 0.0;
      return std::nullopt;
    case Kind::logistic: {
      double s = p_[2];
      double limit = s > 0 ? p_[1] : (s < 0 ? p_[0] : 0.5 * (p_[0] + p_[1]));
      double amp = std::abs(p_[1] - p_[0]);
      if (limit != 0.0) return std::nullopt;
      if (amp == 0.0) return 0.0;
      if (s == 0.0) return std::nullopt;
      double as = std::abs(s);
      return amp * std::exp(-as * (from - p_[3])) / (1.0 - std::exp(-as * step));
    }
    case Kind::iterlog:
      if (p_[0] == 0.0) return 0.0;
      return std::nullopt;
    case Kind::delta:
      return p_[1] >= from ? std::abs(p_[0]) : 0.0;
    case Kind::step: {
      if (p_[1] < from) return 0.0;
      double points = std::floor((p_[1] - from) / step) + 1.0;
      return std::abs(p_[0]) * points;
    }
  }
  return std::nullopt;
}

bool ScalarFunction::nonincreasing_on(int lo, int hi) const {
  for (int x = lo; x < hi; ++x) {
    if ((*this)(x + 1) > (*this)(x)) return false;
  }
  return true;
}

bool ScalarFunction::nondecreasing_on(int lo, int hi) const {
  for (int x = lo; x < hi; ++x) {
    if ((*this)(x + 1) < (*this)(x)) return false;
  }
  return true;
}

std::pair<double, double> ScalarFunction::range_on(int lo, int hi) const {
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  for (int x = lo; x <= hi; ++x) {
    double v = (*this)(x);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  return {mn, mx};
}

}  // namespace dbarw
