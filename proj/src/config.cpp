#include "gwbec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "gwbec/units.hpp"

namespace gwbec {

namespace {

struct Value {
  enum class Type { string, number, boolean, array } type = Type::number;
  std::string text;  // string payload, or the number as written
  double number = 0.0;
  bool integral = false;
  bool boolean = false;
  std::vector<Value> items;
  int line = 0;
};

const char* type_name(Value::Type t) {
  switch (t) {
    case Value::Type::string: return "string";
    case Value::Type::number: return "number";
    case Value::Type::boolean: return "boolean";
    case Value::Type::array: return "array";
  }
  return "value";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
  }
  return k.find("..") == std::string::npos;
}

class Lexer {
 public:
  Lexer(std::string_view s, int line) : s_(s), line_(line) {}

  Value value() {
    skip();
    if (pos_ >= s_.size()) throw std::runtime_error("missing value");
    Value v;
    v.line = line_;
    const char c = s_[pos_];
    if (c == '"') {
      v.type = Value::Type::string;
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
          const char n = s_[++pos_];
          v.text += n == 'n' ? '\n' : n == 't' ? '\t' : n;
        } else {
          v.text += s_[pos_];
        }
        ++pos_;
      }
      if (pos_ >= s_.size()) throw std::runtime_error("unterminated string");
      ++pos_;
    } else if (c == '[') {
      v.type = Value::Type::array;
      ++pos_;
      skip();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      for (;;) {
        v.items.push_back(value());
        if (v.items.back().type == Value::Type::array) throw std::runtime_error("nested arrays are not supported");
        skip();
        if (pos_ >= s_.size()) throw std::runtime_error("unterminated array");
        if (s_[pos_] == ',') {
          ++pos_;
          skip();
          if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            break;
          }
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          break;
        }
        throw std::runtime_error("expected ',' or ']' in array");
      }
    } else {
      std::size_t end = pos_;
      while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != ' ' && s_[end] != '\t') ++end;
      const std::string word(s_.substr(pos_, end - pos_));
      pos_ = end;
      if (word == "true" || word == "false") {
        v.type = Value::Type::boolean;
        v.boolean = word == "true";
      } else {
        std::string digits;
        for (char ch : word) {
          if (ch != '_') digits += ch;
        }
        double d = 0.0;
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
        if (ec != std::errc() || p != digits.data() + digits.size() || digits.empty()) {
          throw std::runtime_error("cannot read value '" + word + "' (strings need double quotes)");
        }
        v.type = Value::Type::number;
        v.number = d;
        v.text = word;
        v.integral = std::isfinite(d) && d == std::floor(d);
      }
    }
    return v;
  }

  void finish() {
    skip();
    if (pos_ < s_.size()) throw std::runtime_error("unexpected text after value");
  }

 private:
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

const std::vector<std::string> kKeys = {
    "name", "seed", "output", "overwrite", "pipelines",
    "grid.dim", "grid.points", "grid.extent",
    "units.system", "units.species", "units.mass_kg", "units.length_scale_m",
    "background.kind", "background.rho0", "background.g", "background.flow_mode",
    "background.Omega", "background.trap_omega", "background.noise",
    "background.vortex_separation", "background.obstacle_height", "background.obstacle_width",
    "background.envelope_radius", "background.perturbation", "background.perturbation_modes",
    "background.relax_steps", "background.relax_tolerance",
    "waveform.kind", "waveform.h_max", "waveform.frequency", "waveform.frequency_end",
    "waveform.phase", "waveform.center", "waveform.width", "waveform.duration", "waveform.file",
    "evolution.scheme", "evolution.dt", "evolution.steps", "evolution.duration",
    "evolution.snapshot_stride", "evolution.check_invariants",
    "linear.quantum_pressure", "linear.source_form", "linear.dt", "linear.dt_fraction", "linear.density_floor",
    "linear.snapshot_stride",
    "detect.N", "detect.n", "detect.dVdh_eV", "detect.noon_epsilon", "detect.strained_Q",
    "detect.T_s", "detect.h_max", "detect.E_eV",
    "ladder.h",
};

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string squash(const std::string& s) {
  std::string r;
  for (char c : s) {
    if (c != '_' && c != '-') r += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return r;
}

std::pair<std::string, std::string> split_section(const std::string& key) {
  const auto dot = key.rfind('.');
  if (dot == std::string::npos) return {"", key};
  return {key.substr(0, dot), key.substr(dot + 1)};
}

template <class E>
std::optional<E> enum_from(const std::string& s, std::initializer_list<E> all) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

class Reader {
 public:
  Reader(const std::map<std::string, Value>& entries, std::vector<std::string>& errors)
      : entries_(entries), errors_(errors) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  bool has_section(const std::string& section) const {
    const auto prefix = section + ".";
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& kv) { return kv.first.rfind(prefix, 0) == 0; });
  }

  void error(const std::string& key, const std::string& what) {
    const auto it = entries_.find(key);
    std::ostringstream os;
    if (it != entries_.end()) os << "line " << it->second.line << ": ";
    os << key << ": " << what;
    errors_.push_back(os.str());
  }

  const Value* get(const std::string& key, Value::Type type) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    if (it->second.type != type) {
      error(key, std::string("expected a ") + type_name(type) + ", got a " + type_name(it->second.type));
      return nullptr;
    }
    return &it->second;
  }

  void number(const std::string& key, double& out) {
    if (const auto* v = get(key, Value::Type::number)) {
      if (!std::isfinite(v->number)) {
        error(key, "must be finite");
        return;
      }
      out = v->number;
    }
  }
  void number(const std::string& key, std::optional<double>& out) {
    double d = 0.0;
    if (has(key)) {
      const std::size_t before = errors_.size();
      number(key, d);
      if (errors_.size() == before) out = d;
    }
  }
  template <class I>
  void integer(const std::string& key, I& out) {
    if (const auto* v = get(key, Value::Type::number)) {
      if (!v->integral || v->number < 0 || v->number > 9.0e15) {
        error(key, "expected a non-negative integer, got " + v->text);
        return;
      }
      out = static_cast<I>(v->number);
    }
  }
  void text(const std::string& key, std::string& out) {
    if (const auto* v = get(key, Value::Type::string)) out = v->text;
  }
  void flag(const std::string& key, bool& out) {
    if (const auto* v = get(key, Value::Type::boolean)) out = v->boolean;
  }
  std::optional<std::vector<double>> numbers(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::vector<double> r;
    if (it->second.type == Value::Type::number) {
      r.push_back(it->second.number);
      return r;
    }
    if (it->second.type != Value::Type::array) {
      error(key, "expected a number or an array of numbers");
      return std::nullopt;
    }
    for (const auto& item : it->second.items) {
      if (item.type != Value::Type::number || !std::isfinite(item.number)) {
        error(key, "array items must be finite numbers");
        return std::nullopt;
      }
      r.push_back(item.number);
    }
    return r;
  }
  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::vector<std::string> r;
    if (it->second.type == Value::Type::string) {
      r.push_back(it->second.text);
      return r;
    }
    if (it->second.type != Value::Type::array) {
      error(key, "expected a string or an array of strings");
      return std::nullopt;
    }
    for (const auto& item : it->second.items) {
      if (item.type != Value::Type::string) {
        error(key, "array items must be strings");
        return std::nullopt;
      }
      r.push_back(item.text);
    }
    return r;
  }

 private:
  const std::map<std::string, Value>& entries_;
  std::vector<std::string>& errors_;
};

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string r;
  for (std::size_t i = 0; i < v.size(); ++i) r += (i ? sep : "") + v[i];
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Lexical pass: one entry per dotted key.
std::map<std::string, Value> lex(const std::string& text, std::vector<std::string>& errors) {
  std::map<std::string, Value> entries;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    auto err = [&](const std::string& what) {
      errors.push_back("line " + std::to_string(line) + ": " + what);
    };
    if (s.front() == '[') {
      if (s.back() != ']') {
        err("section header needs a closing ']'");
        continue;
      }
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section)) err("invalid section name '" + section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      err("expected 'key = value'");
      continue;
    }
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) {
      err("invalid key '" + key + "'");
      continue;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      Lexer lx(std::string_view(s).substr(eq + 1), line);
      Value v = lx.value();
      lx.finish();
      if (!entries.emplace(full, std::move(v)).second) err("duplicate key '" + full + "'");
    } catch (const std::runtime_error& e) {
      err(full + ": " + e.what());
    }
  }
  return entries;
}

}  // namespace

std::string_view to_string(BackgroundKind k) {
  switch (k) {
    case BackgroundKind::homogeneous: return "homogeneous";
    case BackgroundKind::plane_flow: return "plane_flow";
    case BackgroundKind::vortex_pair: return "vortex_pair";
    case BackgroundKind::vortex_lattice: return "vortex_lattice";
    case BackgroundKind::obstacle_flow: return "obstacle_flow";
  }
  return "homogeneous";
}

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::nonlinear: return "nonlinear";
    case Pipeline::linear: return "linear";
    case Pipeline::detectability: return "detectability";
    case Pipeline::cross_validate: return "cross_validate";
  }
  return "nonlinear";
}

bool ScenarioConfig::has(Pipeline p) const {
  return std::find(pipelines.begin(), pipelines.end(), p) != pipelines.end();
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : Error(ErrorKind::invalid_argument, "invalid config:\n  " + join(errors, "\n  ")),
      errors_(std::move(errors)) {}

const std::vector<std::string>& known_config_keys() { return kKeys; }

std::string suggest_key(const std::string& unknown) {
  const auto [sec, leaf] = split_section(unknown);
  const std::string u = squash(leaf);
  std::string best;
  std::size_t best_score = std::string::npos;
  for (const auto& k : kKeys) {
    const auto [ksec, kleaf] = split_section(k);
    const std::string c = squash(kleaf);
    std::size_t score = edit_distance(u, c);
    // "hmax_strian" starts with "hmax": a typo glued onto the right key
    if (c.size() >= 3 && u.rfind(c, 0) == 0) score = std::min<std::size_t>(score, 1);
    if (ksec != sec) score += 2;
    const std::size_t limit = std::max<std::size_t>(2, std::max(u.size(), c.size()) / 3);
    if (score <= limit + (ksec != sec ? 2 : 0) && score < best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  std::vector<std::string> errors;
  const auto entries = lex(text, errors);

  for (const auto& [key, v] : entries) {
    if (std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end()) continue;
    std::string msg = "line " + std::to_string(v.line) + ": unknown key '" + key + "'";
    const auto hint = suggest_key(key);
    if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
    errors.push_back(msg);
  }

  Reader r(entries, errors);
  ScenarioConfig c;
  c.base_dir = base_dir;

  if (!r.has("name")) errors.push_back("missing required key 'name'");
  r.text("name", c.name);
  if (r.has("name")) {
    if (c.name.empty()) r.error("name", "must not be empty");
    for (char ch : c.name) {
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) {
        r.error("name", "may only contain letters, digits, '_', '-' and '.'");
        break;
      }
    }
  }
  r.integer("seed", c.seed);
  std::string output;
  r.text("output", output);
  c.output = output.empty() ? std::filesystem::path("runs") / (c.name.empty() ? "scenario" : c.name)
                            : std::filesystem::path(output);
  r.flag("overwrite", c.overwrite);

  // grid
  if (r.has_section("grid")) {
    GridSpec g;
    r.integer("grid.dim", g.dim);
    if (g.dim < 1 || g.dim > 3) r.error("grid.dim", "must be 1, 2 or 3");
    const auto pts = r.numbers("grid.points");
    const auto ext = r.numbers("grid.extent");
    if (!pts) errors.push_back("missing required key 'grid.points'");
    if (!ext) errors.push_back("missing required key 'grid.extent'");
    if (pts && g.dim >= 1 && g.dim <= 3) {
      if (pts->size() != 1 && pts->size() != static_cast<std::size_t>(g.dim)) {
        r.error("grid.points", "needs 1 or grid.dim = " + std::to_string(g.dim) + " entries");
      } else {
        for (std::size_t a = 0; a < static_cast<std::size_t>(g.dim); ++a) {
          const double p = (*pts)[pts->size() == 1 ? 0 : a];
          if (p < 4 || p != std::floor(p) || p > 4096) {
            r.error("grid.points", "each entry must be an integer in [4, 4096], got " + fmt(p));
            break;
          }
          g.points.push_back(static_cast<std::size_t>(p));
        }
      }
    }
    if (ext && g.dim >= 1 && g.dim <= 3) {
      if (ext->size() != 1 && ext->size() != static_cast<std::size_t>(g.dim)) {
        r.error("grid.extent", "needs 1 or grid.dim = " + std::to_string(g.dim) + " entries");
      } else {
        for (std::size_t a = 0; a < static_cast<std::size_t>(g.dim); ++a) {
          const double e = (*ext)[ext->size() == 1 ? 0 : a];
          if (!(e > 0.0)) {
            r.error("grid.extent", "entries must be positive, got " + fmt(e));
            break;
          }
          g.extent.push_back(e);
        }
      }
    }
    c.grid = g;
  }

  // units
  r.text("units.system", c.units.system);
  if (c.units.system != "simulation" && c.units.system != "atom") {
    r.error("units.system", "must be \"simulation\" or \"atom\", got \"" + c.units.system + "\"");
  }
  if (r.has("units.species")) {
    std::string sp;
    r.text("units.species", sp);
    if (sp == "rb87") {
      c.units.mass_kg = constants::rb87_mass_kg;
    } else {
      r.error("units.species", "only \"rb87\" is known; give units.mass_kg instead");
    }
  }
  r.number("units.mass_kg", c.units.mass_kg);
  r.number("units.length_scale_m", c.units.length_scale_m);
  if (c.units.system == "atom") {
    if (!(c.units.mass_kg > 0.0)) errors.push_back("units.system = \"atom\" needs units.species or units.mass_kg > 0");
    if (!(c.units.length_scale_m > 0.0)) r.error("units.length_scale_m", "must be positive");
  }

  // background
  auto& b = c.background;
  if (r.has("background.kind")) {
    std::string kind;
    r.text("background.kind", kind);
    if (auto k = enum_from(kind, {BackgroundKind::homogeneous, BackgroundKind::plane_flow, BackgroundKind::vortex_pair,
                                  BackgroundKind::vortex_lattice, BackgroundKind::obstacle_flow})) {
      b.kind = *k;
    } else if (!kind.empty()) {
      r.error("background.kind", "unknown kind \"" + kind +
                                     "\" (homogeneous, plane_flow, vortex_pair, vortex_lattice, obstacle_flow)");
    }
  } else if (c.grid) {
    errors.push_back("missing required key 'background.kind'");
  }
  r.number("background.rho0", b.rho0);
  r.number("background.g", b.g);
  if (!(b.rho0 > 0.0)) r.error("background.rho0", "must be positive");
  if (b.g < 0.0) r.error("background.g", "must be non-negative");
  if (auto m = r.numbers("background.flow_mode")) {
    b.flow_mode.clear();
    for (double v : *m) {
      if (v != std::floor(v) || std::abs(v) > 1e6) {
        r.error("background.flow_mode", "entries must be integers");
        break;
      }
      b.flow_mode.push_back(static_cast<int>(v));
    }
  }
  r.number("background.Omega", b.Omega);
  r.number("background.trap_omega", b.trap_omega);
  r.number("background.noise", b.noise);
  r.number("background.vortex_separation", b.vortex_separation);
  r.number("background.obstacle_height", b.obstacle_height);
  r.number("background.obstacle_width", b.obstacle_width);
  r.number("background.envelope_radius", b.envelope_radius);
  r.number("background.perturbation", b.perturbation);
  r.integer("background.perturbation_modes", b.perturbation_modes);
  r.integer("background.relax_steps", b.relax_steps);
  r.number("background.relax_tolerance", b.relax_tolerance);
  if (b.Omega < 0.0) r.error("background.Omega", "must be non-negative");
  if (b.trap_omega < 0.0) r.error("background.trap_omega", "must be non-negative");
  if (b.noise < 0.0) r.error("background.noise", "must be non-negative");
  if (b.envelope_radius < 0.0) r.error("background.envelope_radius", "must be non-negative");
  if (b.perturbation < 0.0) r.error("background.perturbation", "must be non-negative");
  if (b.perturbation_modes < 1) r.error("background.perturbation_modes", "must be at least 1");
  if (b.obstacle_width <= 0.0) r.error("background.obstacle_width", "must be positive");
  if (b.relax_tolerance < 0.0) r.error("background.relax_tolerance", "must be non-negative");

  // waveform
  auto& w = c.waveform;
  w.present = r.has_section("waveform");
  if (w.present) {
    std::string kind = "sinusoid";
    r.text("waveform.kind", kind);
    try {
      w.kind = waveform_kind_from_string(kind);
    } catch (const Error&) {
      r.error("waveform.kind", "unknown kind \"" + kind + "\" (sinusoid, gaussian_pulse, linear_chirp, tabulated)");
    }
    r.number("waveform.h_max", w.params.h_max);
    r.number("waveform.frequency", w.params.frequency);
    r.number("waveform.frequency_end", w.params.frequency_end);
    r.number("waveform.phase", w.params.phase);
    r.number("waveform.center", w.params.center);
    r.number("waveform.width", w.params.width);
    r.number("waveform.duration", w.params.duration);
    std::string file;
    r.text("waveform.file", file);
    if (!file.empty()) w.file = std::filesystem::path(file).is_absolute() ? std::filesystem::path(file) : base_dir / file;
    if (w.kind == WaveformKind::tabulated) {
      if (file.empty()) errors.push_back("waveform.kind = \"tabulated\" needs waveform.file");
    } else {
      if (!r.has("waveform.h_max")) errors.push_back("missing required key 'waveform.h_max'");
      if (!r.has("waveform.duration")) errors.push_back("missing required key 'waveform.duration'");
      if ((w.kind == WaveformKind::sinusoid || w.kind == WaveformKind::linear_chirp) && !r.has("waveform.frequency")) {
        errors.push_back("missing required key 'waveform.frequency'");
      }
      if (w.kind == WaveformKind::gaussian_pulse && !r.has("waveform.width")) {
        errors.push_back("missing required key 'waveform.width'");
      }
      if (w.kind == WaveformKind::linear_chirp && w.params.frequency_end == 0.0) {
        w.params.frequency_end = w.params.frequency;
      }
    }
  }

  // evolution
  auto& e = c.evolution;
  if (r.has("evolution.scheme")) {
    std::string s;
    r.text("evolution.scheme", s);
    try {
      e.scheme = scheme_from_string(s);
      if (e.scheme == Scheme::imaginary_time) r.error("evolution.scheme", "imaginary_time is for preparation only");
    } catch (const Error&) {
      r.error("evolution.scheme", "unknown scheme \"" + s + "\" (flat, metric, gauge)");
    }
  }
  r.number("evolution.dt", e.dt);
  r.integer("evolution.steps", e.steps);
  r.number("evolution.duration", e.duration);
  r.integer("evolution.snapshot_stride", e.snapshot_stride);
  r.flag("evolution.check_invariants", e.check_invariants);
  if (e.dt < 0.0) r.error("evolution.dt", "must be non-negative");
  if (e.duration < 0.0) r.error("evolution.duration", "must be non-negative");

  // linear
  auto& l = c.linear;
  r.flag("linear.quantum_pressure", l.quantum_pressure);
  if (r.has("linear.source_form")) {
    std::string s;
    r.text("linear.source_form", s);
    if (s == "metric") {
      l.source = SourceForm::metric;
    } else if (s == "gauge") {
      l.source = SourceForm::gauge;
    } else {
      r.error("linear.source_form", "must be \"metric\" or \"gauge\"");
    }
  }
  r.number("linear.dt", l.dt);
  r.number("linear.dt_fraction", l.dt_fraction);
  r.number("linear.density_floor", l.density_floor);
  r.integer("linear.snapshot_stride", l.snapshot_stride);
  if (l.dt < 0.0) r.error("linear.dt", "must be non-negative");
  if (!(l.dt_fraction > 0.0 && l.dt_fraction <= 1.0)) r.error("linear.dt_fraction", "must lie in (0, 1]");
  if (!(l.density_floor >= 0.0 && l.density_floor < 1.0)) r.error("linear.density_floor", "must lie in [0, 1)");

  // detect
  auto& d = c.detect;
  r.number("detect.N", d.N);
  r.number("detect.n", d.n);
  r.number("detect.dVdh_eV", d.dVdh_eV);
  r.number("detect.noon_epsilon", d.noon_epsilon);
  r.flag("detect.strained_Q", d.strained_Q);
  r.number("detect.T_s", d.T_s);
  r.number("detect.h_max", d.h_max);
  r.number("detect.E_eV", d.E_eV);
  if (d.N && *d.N < 1.0) r.error("detect.N", "must be at least 1");
  if (d.n && *d.n < 0.0) r.error("detect.n", "must be non-negative");
  if (d.N && d.n && *d.n > *d.N) r.error("detect.n", "exceeds detect.N");
  if (d.dVdh_eV < 0.0) r.error("detect.dVdh_eV", "must be non-negative");
  if (d.noon_epsilon && (*d.noon_epsilon < 0.0 || *d.noon_epsilon > 1.0)) r.error("detect.noon_epsilon", "must lie in [0, 1]");
  if (d.T_s && !(*d.T_s > 0.0)) r.error("detect.T_s", "must be positive");
  if (d.h_max && *d.h_max < 0.0) r.error("detect.h_max", "must be non-negative");
  if (d.E_eV && *d.E_eV < 0.0) r.error("detect.E_eV", "must be non-negative");

  // pipelines
  if (auto names = r.strings("pipelines")) {
    for (const auto& n : *names) {
      if (auto p = enum_from(n, {Pipeline::nonlinear, Pipeline::linear, Pipeline::detectability, Pipeline::cross_validate})) {
        if (!c.has(*p)) c.pipelines.push_back(*p);
      } else {
        r.error("pipelines", "unknown pipeline \"" + n + "\" (nonlinear, linear, detectability, cross_validate)");
      }
    }
    if (names->empty()) r.error("pipelines", "must name at least one pipeline");
  } else if (c.grid) {
    c.pipelines = {Pipeline::nonlinear, Pipeline::detectability};
  } else {
    c.pipelines = {Pipeline::detectability};
  }

  // ladder
  if (auto h = r.numbers("ladder.h")) {
    c.ladder = *h;
  } else if (w.present && w.kind != WaveformKind::tabulated && w.params.h_max > 0.0) {
    c.ladder = {w.params.h_max, 2.0 * w.params.h_max, 4.0 * w.params.h_max};
  }

  // cross-field consistency
  const bool pde = c.has(Pipeline::nonlinear) || c.has(Pipeline::linear) || c.has(Pipeline::cross_validate);
  if (pde && !c.grid) errors.push_back("pipelines nonlinear/linear/cross_validate need a [grid] section");
  if (!c.grid && c.has(Pipeline::detectability)) {
    for (const char* k : {"detect.T_s", "detect.h_max", "detect.E_eV"}) {
      if (!r.has(k)) errors.push_back(std::string("detectability without a grid needs '") + k + "'");
    }
  }
  if (c.grid) {
    const bool drives = c.has(Pipeline::linear) || c.has(Pipeline::cross_validate) || c.has(Pipeline::detectability) ||
                        (c.has(Pipeline::nonlinear) && e.scheme != Scheme::flat);
    if (drives && !w.present) errors.push_back("a [waveform] section is required by the selected pipelines");
  }
  if (c.has(Pipeline::cross_validate)) {
    bool ok = c.ladder.size() >= 2;
    for (std::size_t i = 0; ok && i < c.ladder.size(); ++i) {
      ok = c.ladder[i] > 0.0 && (i == 0 || c.ladder[i] > c.ladder[i - 1]);
    }
    if (!ok) errors.push_back("ladder.h must hold at least two increasing positive strains for cross_validate");
  }

  std::optional<StrainWaveform> wf;
  if (w.present && errors.empty()) {
    try {
      wf = make_waveform(w);
    } catch (const Error& ex) {
      errors.push_back(std::string("waveform: ") + ex.what());
    }
  }

  if (c.grid && !c.grid->points.empty() && c.grid->points.size() == c.grid->extent.size()) {
    const auto& g = *c.grid;
    double dx = g.extent[0] / static_cast<double>(g.points[0]);
    double lmin = g.extent[0];
    for (std::size_t a = 1; a < g.points.size(); ++a) {
      dx = std::min(dx, g.extent[a] / static_cast<double>(g.points[a]));
      lmin = std::min(lmin, g.extent[a]);
    }
    const double lxy = g.dim >= 2 ? std::min(g.extent[0], g.extent[1]) : g.extent[0];
    const bool vortex = b.kind == BackgroundKind::vortex_pair || b.kind == BackgroundKind::vortex_lattice;
    if ((vortex || b.envelope_radius > 0.0 || b.kind == BackgroundKind::obstacle_flow) && g.dim < 2) {
      errors.push_back("background." + std::string(to_string(b.kind)) + " needs grid.dim >= 2");
    }
    if (b.kind == BackgroundKind::vortex_lattice && g.dim != 2) {
      errors.push_back("background.kind = \"vortex_lattice\" needs grid.dim = 2");
    }
    if (vortex && b.g > 0.0) {
      // hbar = m = 1 in every unit system built here
      const double xi = 1.0 / std::sqrt(2.0 * b.g * b.rho0);
      if (dx > 2.0 * xi) {
        errors.push_back("grid spacing " + fmt(dx) + " exceeds twice the healing length " + fmt(xi) +
                         "; vortex cores would not be resolved");
      }
    }
    if (vortex && b.g == 0.0) errors.push_back("vortex backgrounds need background.g > 0");
    if (b.kind == BackgroundKind::vortex_lattice && b.trap_omega > 0.0 && b.Omega >= b.trap_omega) {
      errors.push_back("background.Omega " + fmt(b.Omega) + " must stay below background.trap_omega " + fmt(b.trap_omega));
    }
    if (b.envelope_radius > 0.0 && b.envelope_radius >= 0.5 * lxy) {
      errors.push_back("background.envelope_radius " + fmt(b.envelope_radius) + " must be below half the box, " +
                       fmt(0.5 * lxy));
    }
    if (b.envelope_radius > 0.0 && (b.kind == BackgroundKind::vortex_lattice || b.kind == BackgroundKind::obstacle_flow ||
                                    b.kind == BackgroundKind::plane_flow)) {
      errors.push_back("background.envelope_radius applies to homogeneous and vortex_pair backgrounds only");
    }
    if (b.kind == BackgroundKind::obstacle_flow && b.obstacle_width > 0.25 * lmin) {
      errors.push_back("background.obstacle_width " + fmt(b.obstacle_width) + " exceeds a quarter of the box");
    }
    if (b.flow_mode.size() > static_cast<std::size_t>(g.dim)) {
      errors.push_back("background.flow_mode has more entries than grid.dim");
    }
    const bool gauge_run = (c.has(Pipeline::nonlinear) && e.scheme == Scheme::gauge) || c.has(Pipeline::cross_validate);
    if (e.scheme == Scheme::gauge && g.dim < 2) errors.push_back("evolution.scheme = \"gauge\" needs grid.dim >= 2");
    if (e.scheme == Scheme::gauge && c.has(Pipeline::nonlinear)) {
      if (b.kind == BackgroundKind::vortex_lattice || b.kind == BackgroundKind::obstacle_flow) {
        errors.push_back("evolution.scheme = \"gauge\" does not support backgrounds with an external potential");
      } else if (b.envelope_radius <= 0.0) {
        errors.push_back("evolution.scheme = \"gauge\" needs background.envelope_radius so the field vanishes at the box faces");
      }
    }
    if (gauge_run && b.envelope_radius > 0.0) {
      const double edge = std::exp(-2.0 * std::pow(0.5 * lxy / b.envelope_radius, 4));
      if (edge > gauge_edge_tolerance) {
        errors.push_back("background.envelope_radius " + fmt(b.envelope_radius) + " leaves edge density " + fmt(edge) +
                         " above the gauge limit " + fmt(gauge_edge_tolerance));
      }
    }
    if (wf) {
      const double dt = e.dt > 0.0 ? e.dt : 0.1 * 2.0 * dx * dx / (std::numbers::pi * std::numbers::pi);
      double span = e.duration > 0.0 ? e.duration : wf->duration();
      std::string how = e.duration > 0.0 ? "evolution.duration" : "waveform duration";
      if (e.steps > 0 && e.dt > 0.0) {
        span = static_cast<double>(e.steps) * e.dt;
        how = "evolution.steps " + std::to_string(e.steps) + " x evolution.dt " + fmt(e.dt);
      }
      if (span > wf->duration() * (1.0 + 1e-12)) {
        errors.push_back("evolution span " + fmt(span) + " (" + how + ") exceeds the waveform duration " +
                         fmt(wf->duration()));
      }
      if (e.steps > 0 && e.dt > 0.0 && e.duration > 0.0 &&
          std::abs(static_cast<double>(e.steps) * e.dt - e.duration) > 1e-9 * e.duration) {
        errors.push_back("evolution.steps x evolution.dt = " + fmt(static_cast<double>(e.steps) * e.dt) +
                         " disagrees with evolution.duration " + fmt(e.duration));
      }
      if (span / dt > 5e7) errors.push_back("evolution needs more than 5e7 steps; raise evolution.dt or shorten the span");
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string to_json(const ScenarioConfig& c) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["output"] = c.output.string();
  j["overwrite"] = c.overwrite;
  ordered_json pipes = ordered_json::array();
  for (auto p : c.pipelines) pipes.push_back(std::string(to_string(p)));
  j["pipelines"] = pipes;
  if (c.grid) {
    j["grid"] = {{"dim", c.grid->dim}, {"points", c.grid->points}, {"extent", c.grid->extent}};
    j["units"] = {{"system", c.units.system}, {"mass_kg", c.units.mass_kg}, {"length_scale_m", c.units.length_scale_m}};
    const auto& b = c.background;
    j["background"] = {{"kind", std::string(to_string(b.kind))},
                       {"rho0", b.rho0},
                       {"g", b.g},
                       {"flow_mode", b.flow_mode},
                       {"Omega", b.Omega},
                       {"trap_omega", b.trap_omega},
                       {"noise", b.noise},
                       {"vortex_separation", b.vortex_separation},
                       {"obstacle_height", b.obstacle_height},
                       {"obstacle_width", b.obstacle_width},
                       {"envelope_radius", b.envelope_radius},
                       {"perturbation", b.perturbation},
                       {"perturbation_modes", b.perturbation_modes},
                       {"relax_steps", b.relax_steps},
                       {"relax_tolerance", b.relax_tolerance}};
    const auto& e = c.evolution;
    j["evolution"] = {{"scheme", std::string(to_string(e.scheme))},
                      {"dt", e.dt},
                      {"steps", e.steps},
                      {"duration", e.duration},
                      {"snapshot_stride", e.snapshot_stride},
                      {"check_invariants", e.check_invariants}};
    j["linear"] = {{"quantum_pressure", c.linear.quantum_pressure},
                   {"source_form", std::string(to_string(c.linear.source))},
                   {"dt", c.linear.dt},
                   {"dt_fraction", c.linear.dt_fraction},
                   {"density_floor", c.linear.density_floor},
                   {"snapshot_stride", c.linear.snapshot_stride}};
  }
  if (c.waveform.present) {
    const auto& p = c.waveform.params;
    j["waveform"] = {{"kind", std::string(to_string(c.waveform.kind))},
                     {"h_max", p.h_max},
                     {"frequency", p.frequency},
                     {"frequency_end", p.frequency_end},
                     {"phase", p.phase},
                     {"center", p.center},
                     {"width", p.width},
                     {"duration", p.duration},
                     {"file", c.waveform.file.string()}};
  }
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  j["detect"] = {{"N", opt(c.detect.N)},
                 {"n", opt(c.detect.n)},
                 {"dVdh_eV", c.detect.dVdh_eV},
                 {"noon_epsilon", opt(c.detect.noon_epsilon)},
                 {"strained_Q", c.detect.strained_Q},
                 {"T_s", opt(c.detect.T_s)},
                 {"h_max", opt(c.detect.h_max)},
                 {"E_eV", opt(c.detect.E_eV)}};
  j["ladder"] = {{"h", c.ladder}};
  return j.dump(2);
}

UnitSystem make_units(const UnitSpec& spec) {
  if (spec.system == "atom") return UnitSystem::for_atom(spec.mass_kg, spec.length_scale_m);
  return UnitSystem();
}

GridPtr make_grid(const GridSpec& spec) { return Grid::create(spec.points, spec.extent); }

StrainWaveform make_waveform(const WaveformSpec& spec) {
  if (spec.kind == WaveformKind::tabulated) return StrainWaveform::from_csv(spec.file);
  return StrainWaveform::make(spec.kind, spec.params);
}

}  // namespace gwbec
