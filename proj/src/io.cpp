#include "dbarw/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dbarw/config.hpp"

namespace dbarw {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump_into(const nlohmann::json& j, std::string& out, int depth) {
  auto pad = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        pad(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        dump_into(it.value(), out, depth + 1);
      }
      out += "\n";
      pad(depth);
      out += "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Short scalar arrays (configurations, pairs) stay on one line.
      bool flat = j.size() <= 16;
      for (const auto& e : j) flat = flat && !e.is_object() && (!e.is_array() || e.size() <= 2);
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ",";
          dump_into(j[i], out, depth);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        pad(depth + 1);
        dump_into(j[i], out, depth + 1);
      }
      out += "\n";
      pad(depth);
      out += "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default: out += j.dump(); return;
  }
}

[[noreturn]] void bad_file(const std::string& what) { throw Error(Errc::ConfigParse, what); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    bad_file("not a number: '" + s + "'");
  }
  if (used != s.size()) bad_file("not a number: '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    bad_file("not an integer: '" + s + "'");
  }
  if (used != s.size()) bad_file("not an integer: '" + s + "'");
  return v;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text, const std::string& header,
                                               std::size_t cols) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != header) bad_file("unexpected CSV header: " + line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != cols) bad_file("wrong column count in CSV row: " + line);
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace

std::string dump_json(const nlohmann::json& j) {
  std::string out;
  dump_into(j, out, 0);
  out += "\n";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) bad_file("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    bad_file(path + ": " + e.what());
  }
}

std::string trajectory_csv(const std::vector<Event>& events) {
  std::string out = kTrajectoryHeader;
  out += "\n";
  for (const auto& e : events) {
    out += format_double(e.time);
    out += ',';
    out += kind_name(e.kind);
    out += ',' + std::to_string(e.site) + ',' + std::to_string(e.range) + ',' +
           std::to_string(e.pre_count) + ',' + std::to_string(e.post_count) + ',' +
           std::to_string(e.post_width) + ',' + std::to_string(e.post_fcd) + ',' +
           std::to_string(e.charge) + '\n';
  }
  return out;
}

std::vector<Event> parse_trajectory_csv(const std::string& text, std::int64_t initial_width) {
  std::vector<Event> out;
  std::int64_t prev_width = initial_width;
  for (const auto& f : csv_rows(text, kTrajectoryHeader, 9)) {
    Event e;
    e.time = to_double(f[0]);
    e.kind = parse_kind(f[1]);
    e.site = to_int(f[2]);
    e.range = static_cast<int>(to_int(f[3]));
    e.pre_count = static_cast<std::size_t>(to_int(f[4]));
    e.post_count = static_cast<std::size_t>(to_int(f[5]));
    e.pre_width = prev_width;
    e.post_width = to_int(f[6]);
    e.post_fcd = to_int(f[7]);
    e.charge = static_cast<int>(to_int(f[8]));
    prev_width = e.post_width;
    out.push_back(e);
  }
  return out;
}

RunSummary summarize_run(const Trajectory& tr) {
  RunSummary s;
  s.seed = tr.seed;
  s.n_events = tr.n_events;
  s.final_count = tr.final_state.count();
  s.hit_singleton_time = tr.hit_singleton_time;
  s.max_width = tr.max_width;
  s.time_avg_count = tr.time_avg_count;
  return s;
}

nlohmann::json summary_json(const Trajectory& tr) {
  RunSummary s = summarize_run(tr);
  nlohmann::json j;
  j["seed"] = s.seed;
  j["n_events"] = s.n_events;
  j["final_count"] = s.final_count;
  if (s.hit_singleton_time) j["hit_singleton_time"] = *s.hit_singleton_time;
  j["max_width"] = s.max_width;
  j["time_avg_count"] = s.time_avg_count;
  return j;
}

RunSummary summary_from_json(const nlohmann::json& j) {
  try {
    RunSummary s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.n_events = j.at("n_events").get<std::uint64_t>();
    s.final_count = j.at("final_count").get<std::size_t>();
    if (j.contains("hit_singleton_time")) {
      s.hit_singleton_time = j.at("hit_singleton_time").get<double>();
    }
    s.max_width = j.at("max_width").get<std::int64_t>();
    s.time_avg_count = j.at("time_avg_count").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    bad_file(std::string("bad summary JSON: ") + e.what());
  }
}

nlohmann::json report_json(const ValidationReport& r) {
  nlohmann::json j;
  j["assumption"] = r.assumption;
  j["pass"] = r.pass;
  j["audited_samples"] = r.audited_samples;
  j["worst_witness"] = r.worst_witness ? nlohmann::json(*r.worst_witness) : nlohmann::json();
  j["margin"] = r.margin;
  if (!r.details.empty()) j["details"] = r.details;
  return j;
}

ValidationReport report_from_json(const nlohmann::json& j) {
  try {
    ValidationReport r;
    r.assumption = j.at("assumption").get<std::string>();
    r.pass = j.at("pass").get<bool>();
    r.audited_samples = j.at("audited_samples").get<std::size_t>();
    if (!j.at("worst_witness").is_null()) r.worst_witness = j.at("worst_witness").get<std::string>();
    r.margin = j.at("margin").is_null() ? 0.0 : j.at("margin").get<double>();
    if (j.contains("details")) r.details = j.at("details");
    return r;
  } catch (const nlohmann::json::exception& e) {
    bad_file(std::string("bad validator report: ") + e.what());
  }
}

nlohmann::json drift_report_json(const DriftReport& r) {
  nlohmann::json j;
  j["constants"] = {{"C", r.C}, {"c", r.c}, {"s_lower", r.s_lower}, {"d_bar", r.d_bar}};
  if (r.long_range) j["constants"]["C_bar"] = r.C_bar;
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : r.cases) {
    nlohmann::json k;
    k["config"] = configuration_to_json(c.config);
    k["count"] = c.count;
    k["exact"] = c.exact;
    k["flip_cf"] = c.flip_cf;
    k["excl_cf"] = c.excl_cf;
    if (r.long_range) k["lr_cf"] = c.lr_cf;
    k["bound"] = c.bound;
    k["ok"] = c.ok;
    cases.push_back(std::move(k));
  }
  j["cases"] = std::move(cases);
  j["pass"] = r.pass;
  return j;
}

DriftReport drift_report_from_json(const nlohmann::json& j) {
  try {
    DriftReport r;
    const auto& c = j.at("constants");
    r.C = c.at("C").get<double>();
    r.c = c.at("c").get<double>();
    r.s_lower = c.at("s_lower").get<double>();
    r.d_bar = c.at("d_bar").get<double>();
    r.long_range = c.contains("C_bar");
    r.C_bar = r.long_range ? c.at("C_bar").get<double>() : r.C;
    for (const auto& k : j.at("cases")) {
      DriftCase d;
      d.config = configuration_from_json(k.at("config"));
      d.count = k.at("count").get<std::size_t>();
      d.exact = k.at("exact").get<double>();
      d.flip_cf = k.at("flip_cf").get<double>();
      d.excl_cf = k.at("excl_cf").get<double>();
      if (k.contains("lr_cf")) d.lr_cf = k.at("lr_cf").get<double>();
      d.bound = k.at("bound").get<double>();
      d.ok = k.at("ok").get<bool>();
      r.cases.push_back(std::move(d));
    }
    r.pass = j.at("pass").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    bad_file(std::string("bad drift report: ") + e.what());
  }
}

nlohmann::json recurrence_json(const RecurrenceSummary& s) {
  nlohmann::json j;
  j["replicas"] = s.replicas;
  j["returned"] = s.returned;
  j["n_events"] = s.n_events;
  j["time_avg_count"] = s.mean_time_avg_count;
  j["time_avg_count_se"] = s.se_time_avg_count;
  nlohmann::json curve = nlohmann::json::array();
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    curve.push_back({{"t", s.grid[k]}, {"mean_width_over_t", s.mean_width_over_t[k]}});
  }
  j["width_over_t"] = std::move(curve);
  j["return_time_count"] = s.return_times.size();
  double mean_rt = 0.0;
  for (double r : s.return_times) mean_rt += r;
  j["mean_return_time"] = s.return_times.empty() ? 0.0 : mean_rt / s.return_times.size();
  if (s.window_histograms.size() >= 2) {
    nlohmann::json tv = nlohmann::json::array();
    for (std::size_t k = 1; k < s.window_histograms.size(); ++k) {
      tv.push_back(tv_distance(s.window_histograms[k - 1], s.window_histograms[k]));
    }
    j["window_tv"] = std::move(tv);
  }
  return j;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "width,probability\n";
  for (const auto& [w, p] : h.probabilities()) {
    out += std::to_string(w) + ',' + format_double(p) + '\n';
  }
  return out;
}

std::vector<std::pair<std::int64_t, double>> parse_histogram_csv(const std::string& text) {
  std::vector<std::pair<std::int64_t, double>> out;
  for (const auto& f : csv_rows(text, "width,probability", 2)) {
    out.emplace_back(to_int(f[0]), to_double(f[1]));
  }
  return out;
}

std::string dominator_csv(const DominatorPath& path) {
  std::string out = kTrajectoryHeader;
  out += "\n";
  std::int64_t prev = path.empty() ? 0 : path.front().value;
  for (const auto& p : path) {
    out += format_double(p.time);
    out += ',';
    out += dominator_kind_name(p.kind);
    out += ",0," + std::to_string(p.value - prev) + ",0,0," + std::to_string(p.value) + ",0,0\n";
    prev = p.value;
  }
  return out;
}

DominatorPath parse_dominator_csv(const std::string& text) {
  DominatorPath path;
  for (const auto& f : csv_rows(text, kTrajectoryHeader, 9)) {
    path.push_back({to_double(f[0]), parse_dominator_kind(f[1]), to_int(f[6])});
  }
  return path;
}

}  // namespace dbarw
