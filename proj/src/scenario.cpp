#include "fds/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fds {

Mode parse_mode(const std::string& name) {
  if (name == "state_feedback") return Mode::state_feedback;
  if (name == "output_feedback") return Mode::output_feedback;
  if (name == "open_loop") return Mode::open_loop;
  throw ConfigError("unknown mode '" + name + "' (expected state_feedback, output_feedback or open_loop)");
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::state_feedback: return "state_feedback";
    case Mode::output_feedback: return "output_feedback";
    case Mode::open_loop: return "open_loop";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return v;
}

int to_int(const std::string& text) {
  const double v = to_double(text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("expected an integer, got '" + trim(text) + "'");
  return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_double(item));
  return out;
}

using Setter = std::function<void(Scenario&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& key_table() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"run.name", [](Scenario& s, const std::string& v) { s.name = trim(v); }},
      {"run.duration", [](Scenario& s, const std::string& v) { s.duration = to_double(v); }},
      {"run.dt", [](Scenario& s, const std::string& v) { s.dt = to_double(v); }},
      {"run.integrator", [](Scenario& s, const std::string& v) { s.integrator = parse_scheme(trim(v)); }},
      {"run.mode", [](Scenario& s, const std::string& v) { s.mode = parse_mode(trim(v)); }},
      {"run.record_every", [](Scenario& s, const std::string& v) { s.record_every = to_int(v); }},
      {"run.seed",
       [](Scenario& s, const std::string& v) {
         const double d = to_double(v);
         if (d < 0 || d != std::floor(d)) throw ConfigError("seed must be a non-negative integer");
         s.seed = static_cast<std::uint64_t>(d);
       }},
      {"profile.current",
       [](Scenario& s, const std::string& v) {
         s.current.clear();
         for (const auto& item : split(v, ',')) {
           const auto f = split(item, ':');
           if (f.size() != 2) throw ConfigError("current entries are 'time:amps', got '" + item + "'");
           s.current.push_back({to_double(f[0]), to_double(f[1])});
         }
       }},
      {"profile.setpoint",
       [](Scenario& s, const std::string& v) {
         s.setpoint.clear();
         for (const auto& item : split(v, ',')) {
           const auto f = split(item, ':');
           if (f.size() != 3) throw ConfigError("setpoint entries are 'time:x_nd:x_smd', got '" + item + "'");
           s.setpoint.push_back({to_double(f[0]), to_double(f[1]), to_double(f[2])});
         }
       }},
      {"initial.state", [](Scenario& s, const std::string& v) { s.initial_state = to_list(v); }},
      {"initial.perturb_n", [](Scenario& s, const std::string& v) { s.perturb_n = to_double(v); }},
      {"initial.perturb_sm", [](Scenario& s, const std::string& v) { s.perturb_sm = to_double(v); }},
      {"initial.estimate_offset", [](Scenario& s, const std::string& v) { s.estimate_offset = to_double(v); }},
      {"initial.estimate", [](Scenario& s, const std::string& v) { s.initial_estimate = to_list(v); }},
      {"open_loop.u_bl", [](Scenario& s, const std::string& v) { s.open_loop_u.u_bl = to_double(v); }},
      {"open_loop.u_ht", [](Scenario& s, const std::string& v) { s.open_loop_u.u_ht = to_double(v); }},
      {"controller.beta1", [](Scenario& s, const std::string& v) { s.gains.beta1 = to_double(v); }},
      {"controller.beta2", [](Scenario& s, const std::string& v) { s.gains.beta2 = to_double(v); }},
      {"controller.k_n1", [](Scenario& s, const std::string& v) { s.gains.k_n1 = to_double(v); }},
      {"controller.k_sm1", [](Scenario& s, const std::string& v) { s.gains.k_sm1 = to_double(v); }},
      {"controller.q", [](Scenario& s, const std::string& v) { s.gains.q = to_int(v); }},
      {"controller.completion", [](Scenario& s, const std::string& v) { s.gains.completion = to_double(v); }},
      {"controller.k_j_h2", [](Scenario& s, const std::string& v) { s.gains.energy.k_j_h2 = to_double(v); }},
      {"controller.k_j", [](Scenario& s, const std::string& v) { s.gains.energy.k_j = to_double(v); }},
      {"controller.k_sm_h2", [](Scenario& s, const std::string& v) { s.gains.energy.k_sm_h2 = to_double(v); }},
      {"controller.k_sm", [](Scenario& s, const std::string& v) { s.gains.energy.k_sm = to_double(v); }},
      {"observer.alpha1", [](Scenario& s, const std::string& v) { s.observer.alpha1 = to_double(v); }},
      {"observer.alpha2", [](Scenario& s, const std::string& v) { s.observer.alpha2 = to_double(v); }},
      {"observer.lipschitz_n", [](Scenario& s, const std::string& v) { s.observer.lipschitz_n = to_double(v); }},
      {"observer.lipschitz_sm", [](Scenario& s, const std::string& v) { s.observer.lipschitz_sm = to_double(v); }},
      {"observer.condition_cap", [](Scenario& s, const std::string& v) { s.observer.condition_cap = to_double(v); }},
      {"observer.gain_interval", [](Scenario& s, const std::string& v) { s.observer.gain_interval = to_int(v); }},
      {"metrics.estimate_skip", [](Scenario& s, const std::string& v) { s.metrics.estimate_skip = to_double(v); }},
      {"metrics.step_window", [](Scenario& s, const std::string& v) { s.metrics.step_window = to_double(v); }},
      {"metrics.settle_band", [](Scenario& s, const std::string& v) { s.metrics.settle_band = to_double(v); }},
      {"metrics.decay_tol", [](Scenario& s, const std::string& v) { s.metrics.decay_tol = to_double(v); }},
      {"sweep.param", [](Scenario& s, const std::string& v) { s.sweep_param = trim(v); }},
      {"sweep.values", [](Scenario& s, const std::string& v) { s.sweep_values = to_list(v); }},
  };
  return table;
}

bool is_param_key(const std::string& name) {
  StackParams probe;
  probe.set_uniform_segments(64);
  try {
    return probe.set(name, 1.0);
  } catch (const ConfigError&) {
    return true;  // a recognised name with an out-of-range value
  }
}

// Resolves a possibly bare key to "section.key"; empty if unknown.
std::string resolve(const std::string& key) {
  if (key.rfind("params.", 0) == 0) return is_param_key(key.substr(7)) ? key : "";
  for (const auto& [name, _] : key_table()) {
    if (name == key) return name;
  }
  std::vector<std::string> hits;
  for (const auto& [name, _] : key_table()) {
    if (name.substr(name.find('.') + 1) == key) hits.push_back(name);
  }
  if (is_param_key(key)) hits.push_back("params." + key);
  if (hits.size() > 1) throw ConfigError("ambiguous key '" + key + "'");
  return hits.empty() ? "" : hits.front();
}

void apply_resolved(Scenario& s, const std::string& full, const std::string& value) {
  if (full.rfind("params.", 0) == 0) {
    if (!s.params.set(full.substr(7), to_double(value))) throw ConfigError("unknown parameter '" + full + "'");
    return;
  }
  for (const auto& [name, set] : key_table()) {
    if (name == full) {
      set(s, value);
      return;
    }
  }
  throw ConfigError("unknown key '" + full + "'");
}

}  // namespace

std::vector<std::string> scenario_keys() {
  std::vector<std::string> out;
  for (const auto& [name, _] : key_table()) out.push_back(name);
  for (const auto& [name, _] : StackParams{}.entries()) out.push_back("params." + name);
  return out;
}

void Scenario::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("run.dt must be > 0");
  if (!(duration >= dt)) throw ConfigError("run.duration must be >= run.dt");
  if (record_every < 1) throw ConfigError("run.record_every must be >= 1");
  if (current.empty() || current.front().t > 0.0) throw ConfigError("profile.current must start at t = 0");
  if (setpoint.empty() || setpoint.front().t > 0.0) throw ConfigError("profile.setpoint must start at t = 0");
  for (std::size_t i = 1; i < current.size(); ++i) {
    if (!(current[i].t > current[i - 1].t)) throw ConfigError("profile.current times must increase");
  }
  for (std::size_t i = 1; i < setpoint.size(); ++i) {
    if (!(setpoint[i].t > setpoint[i - 1].t)) throw ConfigError("profile.setpoint times must increase");
  }
  for (const auto& c : current) {
    if (!(c.amps >= 0.0)) throw ConfigError("profile.current values must be >= 0");
  }
  if (!(estimate_offset > -1.0)) throw ConfigError("initial.estimate_offset must be > -1");
  params.validate();
  const int n = 2 * params.n_seg + 2;
  if (!initial_state.empty() && static_cast<int>(initial_state.size()) != n) {
    throw ConfigError("initial.state needs " + std::to_string(n) + " values");
  }
  if (!initial_estimate.empty() && static_cast<int>(initial_estimate.size()) != n) {
    throw ConfigError("initial.estimate needs " + std::to_string(n) + " values");
  }
  if (mode != Mode::open_loop) {
    gains.validate(params.n_seg);
    observer.validate();
  }
  if (!sweep_param.empty() && sweep_values.empty()) throw ConfigError("sweep.values is empty");
}

double Scenario::current_at(double t) const {
  double v = current.front().amps;
  for (const auto& c : current) {
    if (c.t <= t) v = c.amps;
  }
  return v;
}

SetpointStep Scenario::setpoint_at(double t) const {
  SetpointStep v = setpoint.front();
  for (const auto& c : setpoint) {
    if (c.t <= t) v = c;
  }
  return v;
}

Scenario parse_scenario(std::istream& is, const std::string& origin) {
  Scenario s;
  std::string line;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail("unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' outside any [section]");
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) fail("duplicate key '" + full + "'");
    try {
      if (resolve(full) != full) fail("unknown key '" + full + "'");
      apply_resolved(s, full, value);
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind(origin + ":", 0) == 0) throw;
      fail(full + ": " + what);
    }
  }
  for (const char* req : {"run.duration", "run.dt", "run.mode"}) {
    if (!seen.count(req)) throw ConfigError(origin + ": missing required key '" + req + "'");
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read scenario '" + path + "'");
  return parse_scenario(f, path);
}

void apply_override(Scenario& s, const std::string& key, const std::string& value) {
  const std::string full = resolve(trim(key));
  if (full.empty()) throw ConfigError("unknown key '" + key + "'");
  apply_resolved(s, full, value);
}

}  // namespace fds

namespace fds {

namespace {

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out;
}

}  // namespace

void write_scenario(const Scenario& s, std::ostream& os) {
  os << "[run]\nname = " << s.name << "\nduration = " << num(s.duration) << "\ndt = " << num(s.dt)
     << "\nintegrator = " << scheme_name(s.integrator) << "\nmode = " << mode_name(s.mode)
     << "\nrecord_every = " << s.record_every << "\nseed = " << s.seed << "\n\n[profile]\ncurrent = ";
  for (std::size_t i = 0; i < s.current.size(); ++i) {
    os << (i ? ", " : "") << num(s.current[i].t) << ':' << num(s.current[i].amps);
  }
  os << "\nsetpoint = ";
  for (std::size_t i = 0; i < s.setpoint.size(); ++i) {
    os << (i ? ", " : "") << num(s.setpoint[i].t) << ':' << num(s.setpoint[i].x_nd) << ':'
       << num(s.setpoint[i].x_smd);
  }
  os << "\n\n[initial]\n";
  if (!s.initial_state.empty()) os << "state = " << join(s.initial_state) << '\n';
  os << "perturb_n = " << num(s.perturb_n) << "\nperturb_sm = " << num(s.perturb_sm)
     << "\nestimate_offset = " << num(s.estimate_offset) << '\n';
  if (!s.initial_estimate.empty()) os << "estimate = " << join(s.initial_estimate) << '\n';
  os << "\n[open_loop]\nu_bl = " << num(s.open_loop_u.u_bl) << "\nu_ht = " << num(s.open_loop_u.u_ht);
  const ControllerGains& g = s.gains;
  os << "\n\n[controller]\nbeta1 = " << num(g.beta1) << "\nbeta2 = " << num(g.beta2) << "\nk_n1 = "
     << num(g.k_n1) << "\nk_sm1 = " << num(g.k_sm1) << "\nq = " << g.q << "\ncompletion = "
     << num(g.completion) << "\nk_j_h2 = " << num(g.energy.k_j_h2) << "\nk_j = " << num(g.energy.k_j)
     << "\nk_sm_h2 = " << num(g.energy.k_sm_h2) << "\nk_sm = " << num(g.energy.k_sm);
  const ObserverConfig& o = s.observer;
  os << "\n\n[observer]\nalpha1 = " << num(o.alpha1) << "\nalpha2 = " << num(o.alpha2)
     << "\nlipschitz_n = " << num(o.lipschitz_n) << "\nlipschitz_sm = " << num(o.lipschitz_sm)
     << "\ncondition_cap = " << num(o.condition_cap) << "\ngain_interval = " << o.gain_interval;
  const MetricsOptions& m = s.metrics;
  os << "\n\n[metrics]\nestimate_skip = " << num(m.estimate_skip) << "\nstep_window = " << num(m.step_window)
     << "\nsettle_band = " << num(m.settle_band) << "\ndecay_tol = " << num(m.decay_tol) << '\n';
  if (!s.sweep_param.empty()) {
    os << "\n[sweep]\nparam = " << s.sweep_param << "\nvalues = " << join(s.sweep_values) << '\n';
  }
  os << "\n[params]\n";
  // n_seg first: setting it resets the proportions that follow.
  const auto entries = s.params.entries();
  for (const auto& [k, v] : entries) {
    if (k == "n_seg") os << k << " = " << num(v) << '\n';
  }
  for (const auto& [k, v] : entries) {
    if (k != "n_seg") os << k << " = " << num(v) << '\n';
  }
}

}  // namespace fds
