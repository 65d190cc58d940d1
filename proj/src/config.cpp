#include "amo/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace amo {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

std::string where(std::size_t line_no) { return "config line " + std::to_string(line_no) + ": "; }

}  // namespace

FlatConfig parse_flat_config(std::string_view text) {
  FlatConfig out;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError(where(line_no) + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_name(section)) throw UsageError(where(line_no) + "bad section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where(line_no) + "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!valid_name(key)) throw UsageError(where(line_no) + "bad key '" + key + "'");
    if (value.empty()) throw UsageError(where(line_no) + "missing value for '" + key + "'");
    Json parsed;
    try {
      parsed = Json::parse(value);
    } catch (const Json::parse_error&) {
      throw UsageError(where(line_no) + "cannot parse value '" + value + "'");
    }
    if (parsed.is_object() || parsed.is_null()) throw UsageError(where(line_no) + "unsupported value type");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!out.emplace(full, parsed).second) throw UsageError(where(line_no) + "duplicate key '" + full + "'");
  }
  return out;
}

namespace {

double as_double(const std::string& key, const Json& v) {
  if (!v.is_number()) throw UsageError("config: '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw UsageError("config: '" + key + "' must be finite");
  return x;
}

Int as_int(const std::string& key, const Json& v) {
  if (!v.is_number_integer()) throw UsageError("config: '" + key + "' must be an integer");
  return v.get<Int>();
}

bool as_bool(const std::string& key, const Json& v) {
  if (!v.is_boolean()) throw UsageError("config: '" + key + "' must be true or false");
  return v.get<bool>();
}

std::string as_string(const std::string& key, const Json& v) {
  if (!v.is_string()) throw UsageError("config: '" + key + "' must be a quoted string");
  return v.get<std::string>();
}

template <class T, class Fn>
std::vector<T> as_list(const std::string& key, const Json& v, Fn&& one) {
  std::vector<T> out;
  if (v.is_array()) {
    if (v.empty()) throw UsageError("config: '" + key + "' must not be empty");
    for (const auto& e : v) out.push_back(one(key, e));
  } else {
    out.push_back(one(key, v));
  }
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError("config: " + message);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
  const FlatConfig flat = parse_flat_config(text);
  ExperimentConfig c;
  c.source_text = std::string(text);
  bool have_lambda = false;

  using Setter = std::function<void(const std::string&, const Json&)>;
  const std::map<std::string, Setter> setters = {
      {"frequency.spec", [&](auto& k, auto& v) { c.frequency = as_string(k, v); }},
      {"frequency.q_cap", [&](auto& k, auto& v) { c.q_cap = as_int(k, v); }},
      {"frequency.depth", [&](auto& k, auto& v) { c.depth = static_cast<std::size_t>(as_int(k, v)); }},
      {"frequency.beta_window", [&](auto& k, auto& v) { c.beta_window = static_cast<std::size_t>(as_int(k, v)); }},
      {"operator.lambda",
       [&](auto& k, auto& v) {
         c.lambdas = as_list<double>(k, v, as_double);
         have_lambda = true;
       }},
      {"operator.p", [&](auto& k, auto& v) { c.ps = as_list<Int>(k, v, as_int); }},
      {"operator.j", [&](auto& k, auto& v) { c.js = as_list<Int>(k, v, as_int); }},
      {"truncation.N", [&](auto& k, auto& v) { c.half_width = as_int(k, v); }},
      {"fit.lo_fraction", [&](auto& k, auto& v) { c.policy.fit.lo_fraction = as_double(k, v); }},
      {"fit.hi_fraction", [&](auto& k, auto& v) { c.policy.fit.hi_fraction = as_double(k, v); }},
      {"fit.min_r2", [&](auto& k, auto& v) { c.policy.fit.min_r2 = as_double(k, v); }},
      {"fit.min_points", [&](auto& k, auto& v) { c.policy.fit.min_points = static_cast<std::size_t>(as_int(k, v)); }},
      {"fit.center_fraction", [&](auto& k, auto& v) { c.policy.center_fraction = as_double(k, v); }},
      {"fit.tolerance", [&](auto& k, auto& v) { c.policy.tolerance = as_double(k, v); }},
      {"filter.enabled", [&](auto& k, auto& v) { c.filter_enabled = as_bool(k, v); }},
      {"filter.local_half_width", [&](auto& k, auto& v) { c.local_half_width = as_int(k, v); }},
      {"filter.rate_offset", [&](auto& k, auto& v) { c.rate_offset = as_double(k, v); }},
      {"filter.max_set_size", [&](auto& k, auto& v) { c.max_set_size = as_int(k, v); }},
      {"filter.max_scales", [&](auto& k, auto& v) { c.max_scales = static_cast<std::size_t>(as_int(k, v)); }},
      {"output.dir", [&](auto& k, auto& v) { c.output_dir = as_string(k, v); }},
      {"sweep.parallelism", [&](auto& k, auto& v) { c.parallelism = static_cast<unsigned>(as_int(k, v)); }},
  };
  for (const auto& [key, value] : flat) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw UsageError("config: unknown key '" + key + "'");
    it->second(key, value);
  }
  c.policy.beta_window = c.beta_window;

  require(have_lambda, "operator.lambda is required");
  parse_frequency_spec(c.frequency);
  require(c.q_cap >= 2, "frequency.q_cap must be at least 2");
  for (double l : c.lambdas) require(l > 0.0, "operator.lambda values must be positive");
  for (Int p : c.ps) require(p <= 0, "operator.p values must be non-positive");
  require(c.half_width >= 100 && c.half_width <= kMaxHalfWidth, "truncation.N must lie in [100, 10000]");
  require(c.policy.fit.lo_fraction >= 0.0 && c.policy.fit.lo_fraction < c.policy.fit.hi_fraction &&
              c.policy.fit.hi_fraction <= 1.0,
          "fit fractions need 0 <= lo_fraction < hi_fraction <= 1");
  require(c.policy.fit.min_r2 >= 0.0 && c.policy.fit.min_r2 <= 1.0, "fit.min_r2 must lie in [0, 1]");
  require(c.policy.fit.min_points >= 2, "fit.min_points must be at least 2");
  require(c.policy.center_fraction > 0.0 && c.policy.center_fraction <= 1.0, "fit.center_fraction must lie in (0, 1]");
  require(c.policy.tolerance >= 0.0, "fit.tolerance must be non-negative");
  require(c.local_half_width >= 1 && c.local_half_width <= std::min(c.half_width, kMaxDenseHalfWidth),
          "filter.local_half_width must lie in [1, min(N, 1000)]");
  require(c.rate_offset >= 0.0, "filter.rate_offset must be non-negative");
  require(c.max_set_size >= 2 && c.max_set_size <= 1'000'000, "filter.max_set_size must lie in [2, 1000000]");
  require(c.max_scales >= 1, "filter.max_scales must be at least 1");
  require(c.parallelism >= 1 && c.parallelism <= 256, "sweep.parallelism must lie in [1, 256]");
  require(!c.output_dir.empty(), "output.dir must not be empty");
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("config: cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["frequency"] = {{"spec", c.frequency}, {"q_cap", c.q_cap}, {"depth", c.depth}, {"beta_window", c.beta_window}};
  j["operator"] = {{"lambda", c.lambdas}, {"p", c.ps}, {"j", c.js}};
  j["truncation"] = {{"N", c.half_width}};
  j["fit"] = {{"lo_fraction", c.policy.fit.lo_fraction},
              {"hi_fraction", c.policy.fit.hi_fraction},
              {"min_r2", c.policy.fit.min_r2},
              {"min_points", c.policy.fit.min_points},
              {"center_fraction", c.policy.center_fraction},
              {"tolerance", c.policy.tolerance}};
  j["filter"] = {{"enabled", c.filter_enabled},
                 {"local_half_width", c.local_half_width},
                 {"rate_offset", c.rate_offset},
                 {"max_set_size", c.max_set_size},
                 {"max_scales", c.max_scales}};
  j["output"] = {{"dir", c.output_dir}};
  j["sweep"] = {{"parallelism", c.parallelism}};
  return j;
}

}  // namespace amo
