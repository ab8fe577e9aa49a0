#include "blrhl/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "blrhl/errors.hpp"

namespace blrhl::cli {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw NumericError("cannot format number");
  return {buf, end};
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  if (trim(text).empty()) return parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError(what + ": expected true or false, got '" + text + "'");
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    if constexpr (std::is_floating_point_v<T>) out += format_double(values[i]);
    else out += std::to_string(values[i]);
  }
  return out;
}

enum class Kind { text, integer, real, boolean, real_list, int_list };

struct KeyDef {
  Kind kind;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

int to_int(const std::string& v, const std::string& key) {
  const long long x = parse_int(v, key);
  if (x < -2147483647LL || x > 2147483647LL) throw ValidationError(key + ": out of range");
  return static_cast<int>(x);
}

const std::vector<std::pair<std::string, KeyDef>>& key_table() {
  static const std::vector<std::pair<std::string, KeyDef>> table = [] {
    std::vector<std::pair<std::string, KeyDef>> t;
    auto add = [&t](std::string name, Kind kind, auto set, auto get) {
      t.emplace_back(std::move(name), KeyDef{kind, set, get});
    };
    add("prior", Kind::text, [](RunConfig& c, const std::string& v) { c.prior.family = parse_prior_family(v); },
        [](const RunConfig& c) { return to_string(c.prior.family); });
    add("alpha", Kind::real, [](RunConfig& c, const std::string& v) { c.prior.alpha = parse_double(v, "alpha"); },
        [](const RunConfig& c) { return format_double(c.prior.alpha); });
    add("log_w", Kind::real, [](RunConfig& c, const std::string& v) { c.prior.log_w = parse_double(v, "log_w"); },
        [](const RunConfig& c) { return format_double(c.prior.log_w); });
    add("w_sampled", Kind::boolean,
        [](RunConfig& c, const std::string& v) { c.prior.w_sampled = parse_bool(v, "w_sampled"); },
        [](const RunConfig& c) { return std::string(c.prior.w_sampled ? "true" : "false"); });
    add("sigma0_sq", Kind::real,
        [](RunConfig& c, const std::string& v) { c.prior.sigma0_sq = parse_double(v, "sigma0_sq"); },
        [](const RunConfig& c) { return format_double(c.prior.sigma0_sq); });
    add("n1", Kind::integer, [](RunConfig& c, const std::string& v) { c.settings.n1 = to_int(v, "n1"); },
        [](const RunConfig& c) { return std::to_string(c.settings.n1); });
    add("l1", Kind::integer, [](RunConfig& c, const std::string& v) { c.settings.ell1 = to_int(v, "l1"); },
        [](const RunConfig& c) { return std::to_string(c.settings.ell1); });
    add("n2", Kind::integer, [](RunConfig& c, const std::string& v) { c.settings.n2 = to_int(v, "n2"); },
        [](const RunConfig& c) { return std::to_string(c.settings.n2); });
    add("l2", Kind::integer, [](RunConfig& c, const std::string& v) { c.settings.ell2 = to_int(v, "l2"); },
        [](const RunConfig& c) { return std::to_string(c.settings.ell2); });
    add("eps", Kind::real, [](RunConfig& c, const std::string& v) { c.settings.adjust = parse_double(v, "eps"); },
        [](const RunConfig& c) { return format_double(c.settings.adjust); });
    add("zeta", Kind::real, [](RunConfig& c, const std::string& v) { c.settings.zeta = parse_double(v, "zeta"); },
        [](const RunConfig& c) { return format_double(c.settings.zeta); });
    add("thin", Kind::integer, [](RunConfig& c, const std::string& v) { c.settings.thin = to_int(v, "thin"); },
        [](const RunConfig& c) { return std::to_string(c.settings.thin); });
    add("seed", Kind::integer,
        [](RunConfig& c, const std::string& v) {
          const long long s = parse_int(v, "seed");
          if (s < 0) throw ValidationError("seed must be nonnegative");
          c.settings.seed = static_cast<std::uint64_t>(s);
        },
        [](const RunConfig& c) { return std::to_string(c.settings.seed); });
    add("stepsize_rule", Kind::text,
        [](RunConfig& c, const std::string& v) { c.settings.stepsize_rule = parse_stepsize_rule(v); },
        [](const RunConfig& c) { return to_string(c.settings.stepsize_rule); });
    add("burnin_frac", Kind::real,
        [](RunConfig& c, const std::string& v) { c.burnin_frac = parse_double(v, "burnin_frac"); },
        [](const RunConfig& c) { return format_double(c.burnin_frac); });
    add("mode", Kind::text, [](RunConfig& c, const std::string& v) { c.mode = parse_prediction_mode(v); },
        [](const RunConfig& c) { return to_string(c.mode); });
    add("variant", Kind::text, [](RunConfig& c, const std::string& v) { c.variant = parse_generator_variant(v); },
        [](const RunConfig& c) { return to_string(c.variant); });
    add("n_train", Kind::integer, [](RunConfig& c, const std::string& v) { c.n_train = to_int(v, "n_train"); },
        [](const RunConfig& c) { return std::to_string(c.n_train); });
    add("n_test", Kind::integer, [](RunConfig& c, const std::string& v) { c.n_test = to_int(v, "n_test"); },
        [](const RunConfig& c) { return std::to_string(c.n_test); });
    add("p", Kind::integer, [](RunConfig& c, const std::string& v) { c.p = to_int(v, "p"); },
        [](const RunConfig& c) { return std::to_string(c.p); });
    add("train", Kind::text, [](RunConfig& c, const std::string& v) { c.train = v; },
        [](const RunConfig& c) { return c.train; });
    add("test", Kind::text, [](RunConfig& c, const std::string& v) { c.test = v; },
        [](const RunConfig& c) { return c.test; });
    add("data", Kind::text, [](RunConfig& c, const std::string& v) { c.data = v; },
        [](const RunConfig& c) { return c.data; });
    add("chain", Kind::text, [](RunConfig& c, const std::string& v) { c.chain = v; },
        [](const RunConfig& c) { return c.chain; });
    add("truth", Kind::text, [](RunConfig& c, const std::string& v) { c.truth = v; },
        [](const RunConfig& c) { return c.truth; });
    add("out", Kind::text, [](RunConfig& c, const std::string& v) { c.out = v; },
        [](const RunConfig& c) { return c.out; });
    add("grid", Kind::real_list,
        [](RunConfig& c, const std::string& v) {
          c.grid.clear();
          for (const auto& s : split_list(v)) c.grid.push_back(parse_double(s, "grid"));
        },
        [](const RunConfig& c) { return join(c.grid); });
    add("thresholds", Kind::real_list,
        [](RunConfig& c, const std::string& v) {
          c.thresholds.clear();
          for (const auto& s : split_list(v)) c.thresholds.push_back(parse_double(s, "thresholds"));
        },
        [](const RunConfig& c) { return join(c.thresholds); });
    add("features", Kind::int_list,
        [](RunConfig& c, const std::string& v) {
          c.features.clear();
          for (const auto& s : split_list(v)) c.features.push_back(to_int(s, "features"));
        },
        [](const RunConfig& c) { return join(c.features); });
    add("jobs", Kind::integer, [](RunConfig& c, const std::string& v) { c.jobs = to_int(v, "jobs"); },
        [](const RunConfig& c) { return std::to_string(c.jobs); });
    return t;
  }();
  return table;
}

const KeyDef* find_key(const std::string& key) {
  for (const auto& [name, def] : key_table()) {
    if (name == key) return &def;
  }
  return nullptr;
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(what + ": not a number: '" + text + "'");
  }
  return value;
}

long long parse_int(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(what + ": not an integer: '" + text + "'");
  }
  return value;
}

std::vector<double> grid_range(double from, double to, int points) {
  if (points < 1) throw ValidationError("grid needs at least one point");
  if (points == 1) return {from};
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[i] = from + (to - from) * i / (points - 1);
  return grid;
}

std::string default_out_dir() {
  const char* env = std::getenv("BLRHL_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : "out";
}

FitConfig RunConfig::fit_config() const {
  FitConfig c;
  c.prior = prior;
  c.settings = settings;
  c.burnin_frac = burnin_frac;
  c.mode = mode;
  return c;
}

GeneratorSpec RunConfig::generator_spec() const {
  GeneratorSpec g;
  g.variant = variant;
  g.n_train = n_train;
  g.n_test = n_test;
  g.p = p;
  g.seed = settings.seed;
  return g;
}

void RunConfig::validate() const {
  fit_config().validate();
  if (jobs < 1) throw ValidationError("jobs must be at least 1");
  for (int f : features) {
    if (f < 1) throw ValidationError("feature indices are 1-based");
  }
}

void set_key(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "grid_range") {
    const auto parts = split_list([&] {
      std::string v = value;
      for (char& ch : v) if (ch == ':') ch = ',';
      return v;
    }());
    if (parts.size() != 3) throw ValidationError("grid_range must be from:to:points");
    config.grid = grid_range(parse_double(parts[0], "grid_range"), parse_double(parts[1], "grid_range"),
                             static_cast<int>(parse_int(parts[2], "grid_range")));
    return;
  }
  const KeyDef* def = find_key(key);
  if (def == nullptr) throw ValidationError("unknown config key '" + key + "'");
  def->set(config, trim(value));
}

KeyValues to_key_values(const RunConfig& config) {
  KeyValues kv;
  for (const auto& [name, def] : key_table()) kv.emplace_back(name, def.get(config));
  return kv;
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_key(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

std::string to_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : to_key_values(config)) out += k + " = " + v + "\n";
  return out;
}

nlohmann::ordered_json to_json(const RunConfig& config) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, def] : key_table()) {
    const std::string v = def.get(config);
    switch (def.kind) {
      case Kind::text: j[name] = v; break;
      case Kind::integer: j[name] = parse_int(v, name); break;
      case Kind::real: j[name] = parse_double(v, name); break;
      case Kind::boolean: j[name] = v == "true"; break;
      case Kind::real_list: {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& s : split_list(v)) arr.push_back(parse_double(s, name));
        j[name] = arr;
        break;
      }
      case Kind::int_list: {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& s : split_list(v)) arr.push_back(parse_int(s, name));
        j[name] = arr;
        break;
      }
    }
  }
  return j;
}

namespace {

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) return format_double(v.get<double>());
  throw ValidationError("unsupported config value " + v.dump());
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config JSON must be an object");
  RunConfig config;
  for (const auto& [key, value] : j.items()) {
    if (value.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i > 0) joined += ",";
        joined += json_scalar(value[i]);
      }
      set_key(config, key, joined);
    } else {
      set_key(config, key, json_scalar(value));
    }
  }
  return config;
}

}  // namespace blrhl::cli
