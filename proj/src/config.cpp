#include "dbarw/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dbarw/catalog.hpp"

namespace dbarw {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(Errc::ConfigParse, what); }

/// Object reader that remembers which keys were consumed.
class Obj {
 public:
  Obj(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) parse_error(path_ + " must be an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string at(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const nlohmann::json& raw(const std::string& k) {
    if (!has(k)) parse_error("missing field " + at(k));
    used_.insert(k);
    return j_.at(k);
  }

  double number(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_number()) parse_error(at(k) + " must be a number");
    return v.get<double>();
  }
  double number(const std::string& k, double fallback) { return has(k) ? number(k) : fallback; }

  std::uint64_t u64(const std::string& k) {
    const auto& v = raw(k);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    if (v.is_number_float()) {
      double d = v.get<double>();
      if (d >= 0 && d == std::floor(d) && d < 1.8446744073709552e19) {
        return static_cast<std::uint64_t>(d);
      }
    }
    parse_error(at(k) + " must be a nonnegative integer");
  }
  std::optional<std::uint64_t> opt_u64(const std::string& k) {
    if (!has(k) || j_.at(k).is_null()) {
      if (has(k)) used_.insert(k);
      return std::nullopt;
    }
    return u64(k);
  }

  std::string text(const std::string& k) {
    const auto& v = raw(k);
    if (!v.is_string()) parse_error(at(k) + " must be a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& k, const std::string& fallback) {
    return has(k) ? text(k) : fallback;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) parse_error("unknown field " + at(it.key()));
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

ScalarFunction function_field(Obj& o, const std::string& k, const ScalarFunction& fallback) {
  if (!o.has(k)) return fallback;
  try {
    return ScalarFunction::from_json(o.raw(k));
  } catch (const Error& e) {
    parse_error(o.at(k) + ": " + e.what());
  }
}

A4Variant parse_a4(const std::string& s, const std::string& where) {
  if (s == "a") return A4Variant::a;
  if (s == "b") return A4Variant::b;
  if (s == "either") return A4Variant::either;
  parse_error(where + " must be \"a\", \"b\" or \"either\"");
}

struct FamilyRef {
  std::string id;
  nlohmann::json params = nlohmann::json::object();
};

FamilyRef family_ref(const nlohmann::json& j, const std::string& path) {
  Obj o(j, path);
  FamilyRef f;
  f.id = o.text("id");
  if (o.has("params")) {
    f.params = o.raw("params");
    if (!f.params.is_object()) parse_error(o.at("params") + " must be an object");
  }
  o.finish();
  return f;
}

}  // namespace

DeclaredConstants constants_from_json(const nlohmann::json& j) {
  Obj o(j, "model.constants");
  DeclaredConstants c;
  c.s_lower = o.number("s_lower");
  c.d_bar = o.number("d_bar");
  c.B_n = function_field(o, "B_n", c.B_n);
  c.D_bar = o.number("D_bar", c.D_bar);
  c.B_tilde = function_field(o, "B_tilde", c.B_tilde);
  c.B_bar = o.number("B_bar", c.B_bar);
  if (o.has("A4")) c.a4 = parse_a4(o.text("A4"), o.at("A4"));
  if (o.has("n_audit")) {
    auto n = o.u64("n_audit");
    if (n < 1 || n > 100'000'000) parse_error("model.constants.n_audit out of range");
    c.n_audit = static_cast<int>(n);
  }
  if (o.has("H")) {
    Obj h(o.raw("H"), "model.constants.H");
    c.H.amp = h.number("amp", 0.0);
    c.H.n_exp = h.number("n_exp", 0.0);
    c.H.l_power = h.number("l_power", 0.0);
    c.H.l_geom = h.number("l_geom", 1.0);
    c.H.range = static_cast<int>(h.number("range", -1.0));
    h.finish();
  }
  o.finish();
  return c;
}

ModelSpec model_from_json(const nlohmann::json& j) {
  Obj o(j, "model");
  ModelSpec m;
  m.alpha1 = o.number("alpha1");
  m.alpha2 = o.number("alpha2");
  if (!(m.alpha1 >= 0) || !(m.alpha2 >= 0) || !std::isfinite(m.alpha1) ||
      !std::isfinite(m.alpha2)) {
    throw Error(Errc::ModelInvalid, "alpha1 and alpha2 must be finite and >= 0");
  }
  FamilyRef w = family_ref(o.raw("walk"), "model.walk");
  FamilyRef b = family_ref(o.raw("branch"), "model.branch");
  std::optional<FamilyRef> lr;
  if (o.has("long_range") && !o.raw("long_range").is_null()) {
    lr = family_ref(o.raw("long_range"), "model.long_range");
  }
  m.constants = constants_from_json(o.raw("constants"));
  o.finish();
  m.walk = build_walk(w.id, w.params);
  m.branch = build_branch(b.id, b.params);
  if (lr) m.long_range = build_long_range(lr->id, lr->params);
  const auto& c = m.constants;
  if (c.s_lower < 0 || c.d_bar < 0 || c.D_bar < 0 || c.B_bar < 0) {
    throw Error(Errc::ModelInvalid, "declared constants must be nonnegative");
  }
  return m;
}

Configuration configuration_from_json(const nlohmann::json& j) {
  if (!j.is_array()) parse_error("configuration must be an array of [position, sign] pairs");
  std::vector<Particle> ps;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      parse_error("configuration entries must be [position, sign] integer pairs");
    }
    auto s = e[1].get<std::int64_t>();
    if (s != 1 && s != -1) parse_error("particle sign must be 1 or -1");
    ps.push_back({e[0].get<Site>(), s > 0 ? Sign::plus : Sign::minus});
  }
  if (ps.empty()) parse_error("configuration must not be empty");
  try {
    return Configuration::from_particles(std::move(ps));
  } catch (const Error& err) {
    parse_error(std::string("invalid initial configuration: ") + err.what());
  }
}

nlohmann::json configuration_to_json(const Configuration& y) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : y.particles()) a.push_back({p.position, value(p.sign)});
  return a;
}

bool OutputParams::wants(const std::string& f) const {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

StopRule RunConfig::stop_rule() const {
  StopRule s;
  s.horizon = run.horizon;
  s.max_events = run.max_events;
  s.until_singleton = run.stop == StopKind::singleton;
  return s;
}

std::uint64_t RunConfig::event_budget() const {
  if (std::getenv("DBARW_EVENT_BUDGET")) return default_event_budget();
  return run.event_budget.value_or(default_event_budget());
}

RunConfig parse_config(const nlohmann::json& j) {
  Obj top(j, "");
  if (!top.has("spec_version")) parse_error("missing field spec_version");
  if (top.number("spec_version") != 1) parse_error("spec_version must be 1");
  RunConfig rc;
  rc.model_json = top.raw("model");
  rc.initial = configuration_from_json(top.raw("initial"));

  if (top.has("run")) {
    Obj r(top.raw("run"), "run");
    auto& p = rc.run;
    std::string mode = r.text("mode", "summary");
    if (mode == "events") {
      p.mode = RecordMode::events;
    } else if (mode != "summary") {
      parse_error("run.mode must be \"events\" or \"summary\"");
    }
    if (r.has("horizon")) {
      p.horizon = r.number("horizon");
      if (!(*p.horizon >= 0) || !std::isfinite(*p.horizon)) parse_error("run.horizon must be >= 0");
    }
    p.max_events = r.opt_u64("max_events");
    p.seed = r.opt_u64("seed");
    if (r.has("replicas")) p.replicas = r.u64("replicas");
    if (p.replicas < 1) parse_error("run.replicas must be >= 1");
    p.burn_in = r.number("burn_in", p.burn_in);
    if (!(p.burn_in >= 0 && p.burn_in < 1)) parse_error("run.burn_in must lie in [0, 1)");
    std::string stop = r.text("stop", "horizon");
    if (stop == "horizon") {
      p.stop = StopKind::horizon;
    } else if (stop == "singleton") {
      p.stop = StopKind::singleton;
    } else if (stop == "max_events") {
      p.stop = StopKind::max_events;
    } else {
      parse_error("run.stop must be \"horizon\", \"singleton\" or \"max_events\"");
    }
    p.K = r.number("K", p.K);
    if (r.has("samples")) p.samples = r.u64("samples");
    if (r.has("width")) p.width = static_cast<std::int64_t>(r.u64("width"));
    if (r.has("max_count")) p.max_count = r.u64("max_count");
    if (r.has("exact_cap")) p.exact_cap = r.u64("exact_cap");
    p.h_factor = r.number("h_factor", p.h_factor);
    p.event_budget = r.opt_u64("event_budget");
    if (r.has("grid")) {
      const auto& g = r.raw("grid");
      if (!g.is_array()) parse_error("run.grid must be an array of times");
      for (const auto& v : g) {
        if (!v.is_number()) parse_error("run.grid must be an array of times");
        p.grid.push_back(v.get<double>());
      }
    }
    if (r.has("windows")) {
      const auto& w = r.raw("windows");
      if (!w.is_array()) parse_error("run.windows must be an array of [t0, t1] pairs");
      for (const auto& v : w) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
          parse_error("run.windows must be an array of [t0, t1] pairs");
        }
        p.windows.emplace_back(v[0].get<double>(), v[1].get<double>());
      }
    }
    r.finish();
    if (p.mode == RecordMode::events && !p.seed) {
      parse_error("run.seed is required when run.mode is \"events\"");
    }
    if (p.stop == StopKind::horizon && !p.horizon) parse_error("run.horizon is required for stop \"horizon\"");
    if (p.stop == StopKind::max_events && !p.max_events) {
      parse_error("run.max_events is required for stop \"max_events\"");
    }
    if (p.samples < 1) parse_error("run.samples must be >= 1");
  } else {
    rc.run.horizon = 10.0;
  }

  if (top.has("output")) {
    Obj o(top.raw("output"), "output");
    rc.output.directory = o.text("directory", rc.output.directory);
    if (o.has("formats")) {
      const auto& f = o.raw("formats");
      if (!f.is_array()) parse_error("output.formats must be an array of strings");
      rc.output.formats.clear();
      for (const auto& v : f) {
        if (!v.is_string()) parse_error("output.formats must be an array of strings");
        rc.output.formats.push_back(v.get<std::string>());
      }
    }
    o.finish();
  }
  top.finish();
  rc.model = model_from_json(rc.model_json);
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    parse_error(path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace dbarw
