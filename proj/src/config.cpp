#include "pulsepol/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "pulsepol/error.hpp"
#include "pulsepol/format.hpp"
#include "pulsepol/units.hpp"

namespace pulsepol::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  v = trim(v);
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key), "expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

long long to_int(std::string_view key, std::string_view v) {
  long long out = 0;
  v = trim(v);
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key), "expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  v = trim(v);
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key), "expected a non-negative integer, got '" +
                                            std::string(v) + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(v) + "'");
}

struct Entry {
  ConfigKey key;
  std::function<void(SweepConfig&, std::string_view)> set;
  std::function<std::string(const SweepConfig&)> get;
};

std::string fmt(double v) { return format_double(v); }

const std::vector<Entry>& entries() {
  using S = SweepConfig;
  using V = std::string_view;
  static const std::vector<Entry> table = {
      {{"detuning_min_mhz", "lowest detuning of the grid, MHz"},
       [](S& c, V v) { c.detuning_min = units::mhz(to_double("detuning_min_mhz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.detuning_min)); }},
      {{"detuning_max_mhz", "highest detuning of the grid, MHz"},
       [](S& c, V v) { c.detuning_max = units::mhz(to_double("detuning_max_mhz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.detuning_max)); }},
      {{"detuning_steps", "number of detuning grid points"},
       [](S& c, V v) { c.detuning_steps = static_cast<int>(to_int("detuning_steps", v)); },
       [](const S& c) { return std::to_string(c.detuning_steps); }},
      {{"rabi_error_min", "lowest fractional Rabi error of the grid"},
       [](S& c, V v) { c.rabi_error_min = to_double("rabi_error_min", v); },
       [](const S& c) { return fmt(c.rabi_error_min); }},
      {{"rabi_error_max", "highest fractional Rabi error of the grid"},
       [](S& c, V v) { c.rabi_error_max = to_double("rabi_error_max", v); },
       [](const S& c) { return fmt(c.rabi_error_max); }},
      {{"rabi_error_steps", "number of Rabi error grid points"},
       [](S& c, V v) { c.rabi_error_steps = static_cast<int>(to_int("rabi_error_steps", v)); },
       [](const S& c) { return std::to_string(c.rabi_error_steps); }},
      {{"realizations", "lattice realizations per grid cell"},
       [](S& c, V v) { c.realizations = static_cast<int>(to_int("realizations", v)); },
       [](const S& c) { return std::to_string(c.realizations); }},
      {{"seed", "base seed for lattice realizations"},
       [](S& c, V v) { c.base_seed = to_u64("seed", v); },
       [](const S& c) { return std::to_string(c.base_seed); }},
      {{"bath", "lattice or single"},
       [](S& c, V v) {
         v = trim(v);
         if (v != "lattice" && v != "single") {
           throw ConfigError("bath", "expected lattice or single, got '" + std::string(v) + "'");
         }
         c.bath = std::string(v);
       },
       [](const S& c) { return c.bath; }},
      {{"nuclei", "closest lattice nuclei kept"},
       [](S& c, V v) { c.nuclei = static_cast<int>(to_int("nuclei", v)); },
       [](const S& c) { return std::to_string(c.nuclei); }},
      {{"larmor_mhz", "nuclear Larmor frequency, MHz"},
       [](S& c, V v) { c.larmor = units::mhz(to_double("larmor_mhz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.larmor)); }},
      {{"rabi_mhz", "pulse Rabi frequency, MHz"},
       [](S& c, V v) { c.rabi = units::mhz(to_double("rabi_mhz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.rabi)); }},
      {{"hyperfine_x_khz", "A_x of the single-nucleus bath, kHz"},
       [](S& c, V v) { c.hyperfine_x = units::khz(to_double("hyperfine_x_khz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.hyperfine_x) * 1e3); }},
      {{"hyperfine_z_khz", "A_z of the single-nucleus bath, kHz"},
       [](S& c, V v) { c.hyperfine_z = units::khz(to_double("hyperfine_z_khz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.hyperfine_z) * 1e3); }},
      {{"nuclear_init", "mixed, up or down"},
       [](S& c, V v) {
         v = trim(v);
         if (v == "mixed") c.nuclear_init = engine::NuclearInit::kMixed;
         else if (v == "up") c.nuclear_init = engine::NuclearInit::kUp;
         else if (v == "down") c.nuclear_init = engine::NuclearInit::kDown;
         else throw ConfigError("nuclear_init", "expected mixed, up or down");
       },
       [](const S& c) {
         switch (c.nuclear_init) {
           case engine::NuclearInit::kUp: return std::string("up");
           case engine::NuclearInit::kDown: return std::string("down");
           default: return std::string("mixed");
         }
       }},
      {{"sequence", "pulsepol, pulsepol-yx, pulsepol-combined, polxy, novel or ise"},
       [](S& c, V v) {
         v = trim(v);
         if (v != "pulsepol" && v != "pulsepol-yx" && v != "pulsepol-combined" &&
             v != "polxy" && v != "novel" && v != "ise") {
           throw ConfigError("sequence", "unknown sequence '" + std::string(v) + "'");
         }
         c.sequence.kind = std::string(v);
       },
       [](const S& c) { return c.sequence.kind; }},
      {{"n", "resonance order"},
       [](S& c, V v) { c.sequence.n = static_cast<int>(to_int("n", v)); },
       [](const S& c) { return std::to_string(c.sequence.n); }},
      {{"timing", "ideal (delta pulses) or finite"},
       [](S& c, V v) {
         v = trim(v);
         if (v == "ideal") c.sequence.timing = Timing::kIdeal;
         else if (v == "finite") c.sequence.timing = Timing::kFinite;
         else throw ConfigError("timing", "expected ideal or finite");
       },
       [](const S& c) {
         return std::string(c.sequence.timing == Timing::kIdeal ? "ideal" : "finite");
       }},
      {{"composite", "replace pulses by composite pulses"},
       [](S& c, V v) { c.sequence.composite = to_bool("composite", v); },
       [](const S& c) { return std::string(c.sequence.composite ? "true" : "false"); }},
      {{"lock_rabi_mhz", "spin-lock Rabi frequency, MHz (0 = Larmor)"},
       [](S& c, V v) { c.sequence.lock_rabi = units::mhz(to_double("lock_rabi_mhz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.sequence.lock_rabi)); }},
      {{"lock_duration_us", "spin-lock duration, microseconds"},
       [](S& c, V v) { c.sequence.lock_duration = units::us(to_double("lock_duration_us", v)); },
       [](const S& c) { return fmt(c.sequence.lock_duration * 1e6); }},
      {{"sweep_range_mhz", "ISE sweep bandwidth, MHz"},
       [](S& c, V v) { c.sequence.sweep_range = units::mhz(to_double("sweep_range_mhz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.sequence.sweep_range)); }},
      {{"inverse_rate_us_per_mhz", "ISE inverse sweep rate, microseconds per MHz"},
       [](S& c, V v) {
         c.sequence.inverse_rate =
             to_double("inverse_rate_us_per_mhz", v) * 1e-6 / units::mhz(1.0);
       },
       [](const S& c) { return fmt(c.sequence.inverse_rate * units::mhz(1.0) * 1e6); }},
      {{"cycles", "sequence cycles (PulsePol blocks) per run"},
       [](S& c, V v) { c.cycles = static_cast<int>(to_int("cycles", v)); },
       [](const S& c) { return std::to_string(c.cycles); }},
      {{"resonance_shift", "relative lengthening of the pulse spacing"},
       [](S& c, V v) { c.resonance_shift = to_double("resonance_shift", v); },
       [](const S& c) { return fmt(c.resonance_shift); }},
      {{"phase_error", "phase error on chained pi/2 pulses, rad, or 'matched'"},
       [](S& c, V v) {
         if (trim(v) == "matched") c.phase_error.reset();
         else c.phase_error = to_double("phase_error", v);
       },
       [](const S& c) { return c.phase_error ? fmt(*c.phase_error) : std::string("matched"); }},
      {{"detuning_mhz", "detuning for single runs, MHz"},
       [](S& c, V v) { c.detuning = units::mhz(to_double("detuning_mhz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.detuning)); }},
      {{"rabi_error", "fractional Rabi error for single runs"},
       [](S& c, V v) { c.rabi_error = to_double("rabi_error", v); },
       [](const S& c) { return fmt(c.rabi_error); }},
      {{"sample_every", "cycles between trace samples"},
       [](S& c, V v) {
         const auto k = to_int("sample_every", v);
         if (k < 1) throw ConfigError("sample_every", "must be >= 1");
         c.sample_every = static_cast<std::size_t>(k);
       },
       [](const S& c) { return std::to_string(c.sample_every); }},
      {{"max_step_ns", "sample inside elements every max_step_ns (0 = off)"},
       [](S& c, V v) { c.max_step = units::ns(to_double("max_step_ns", v)); },
       [](const S& c) { return fmt(c.max_step * 1e9); }},
      {{"propi_cycles", "polarise/reset repetitions"},
       [](S& c, V v) { c.propi_cycles = static_cast<int>(to_int("propi_cycles", v)); },
       [](const S& c) { return std::to_string(c.propi_cycles); }},
      {{"pulsepol_blocks", "PulsePol blocks per repetition (0 = match lock duration)"},
       [](S& c, V v) { c.pulsepol_blocks = static_cast<int>(to_int("pulsepol_blocks", v)); },
       [](const S& c) { return std::to_string(c.pulsepol_blocks); }},
      {{"reset_fidelity", "electron population returned to |0> per reset"},
       [](S& c, V v) { c.reset_fidelity = to_double("reset_fidelity", v); },
       [](const S& c) { return fmt(c.reset_fidelity); }},
      {{"ise_rabi_mhz", "ISE drive Rabi frequency, MHz (0 = lock Rabi)"},
       [](S& c, V v) { c.ise_rabi = units::mhz(to_double("ise_rabi_mhz", v)); },
       [](const S& c) { return fmt(units::to_mhz(c.ise_rabi)); }},
      {{"threads", "worker threads"},
       [](S& c, V v) { c.threads = static_cast<int>(to_int("threads", v)); },
       [](const S& c) { return std::to_string(c.threads); }},
  };
  return table;
}

}  // namespace

void SweepConfig::validate() const {
  if (detuning_steps < 1) throw ConfigError("detuning_steps", "must be >= 1");
  if (rabi_error_steps < 1) throw ConfigError("rabi_error_steps", "must be >= 1");
  if (detuning_steps > 1 && !(detuning_max > detuning_min)) {
    throw ConfigError("detuning_max_mhz", "must exceed detuning_min_mhz");
  }
  if (rabi_error_steps > 1 && !(rabi_error_max > rabi_error_min)) {
    throw ConfigError("rabi_error_max", "must exceed rabi_error_min");
  }
  for (double e : {rabi_error_min, rabi_error_max, rabi_error}) {
    if (!(std::abs(e) < 1.0)) throw ConfigError("rabi_error", "|value| must be < 1");
  }
  if (realizations < 1) throw ConfigError("realizations", "must be >= 1");
  if (bath == "lattice" && (nuclei < 1 || nuclei > 8)) {
    throw ConfigError("nuclei", "must lie in 1..8");
  }
  if (!(larmor > 0.0)) throw ConfigError("larmor_mhz", "must be > 0");
  if (!(rabi > 0.0)) throw ConfigError("rabi_mhz", "must be > 0");
  if (sequence.n < 1) throw ConfigError("n", "must be >= 1");
  if (sequence.kind.rfind("pulsepol", 0) == 0 && sequence.n % 2 == 0) {
    throw ConfigError("n", "PulsePol needs an odd resonance order");
  }
  if (cycles < 0) throw ConfigError("cycles", "must be >= 0");
  if (!(resonance_shift > -1.0)) throw ConfigError("resonance_shift", "must be > -1");
  if (propi_cycles < 1) throw ConfigError("propi_cycles", "must be >= 1");
  if (pulsepol_blocks < 0) throw ConfigError("pulsepol_blocks", "must be >= 0");
  if (!(reset_fidelity >= 0.0 && reset_fidelity <= 1.0)) {
    throw ConfigError("reset_fidelity", "must lie in [0, 1]");
  }
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
  if (sequence.kind == "ise" && !(sequence.sweep_range > 0.0)) {
    throw ConfigError("sweep_range_mhz", "must be > 0 for ise");
  }
  if (sequence.kind == "ise" && !(sequence.inverse_rate > 0.0)) {
    throw ConfigError("inverse_rate_us_per_mhz", "must be > 0 for ise");
  }
  if (!(sequence.lock_duration >= 0.0)) throw ConfigError("lock_duration_us", "must be >= 0");
  if (max_step < 0.0) throw ConfigError("max_step_ns", "must be >= 0");
}

double SweepConfig::effective_phase_error() const {
  if (phase_error) return *phase_error;
  if (resonance_shift == 0.0) return 0.0;
  const bool family = sequence.kind.rfind("pulsepol", 0) == 0;
  if (!family || sequence.n < 1 || sequence.n % 2 == 0) return 0.0;
  const double mag = 2.0 / (units::kPi * sequence.n);
  const double slope = sequence.n % 4 == 3 ? mag : -mag;
  return resonance_shift / slope;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

void set_config_value(SweepConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& e : entries()) {
    if (e.key.name == key) {
      e.set(cfg, value);
      return;
    }
  }
  throw ConfigError(std::string(key), "unknown key");
}

SweepConfig parse_config(std::istream& in, SweepConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v(line);
    if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    }
    set_config_value(base, v.substr(0, eq), v.substr(eq + 1));
  }
  return base;
}

SweepConfig load_config(const std::string& path, SweepConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in, std::move(base));
}

SweepConfig default_config() {
  SweepConfig c;
  c.detuning_min = units::mhz(-100.0);
  c.detuning_max = units::mhz(100.0);
  c.detuning_steps = 41;
  c.rabi_error_min = -0.2;
  c.rabi_error_max = 0.2;
  c.rabi_error_steps = 21;
  c.realizations = 10;
  c.nuclei = 5;
  c.larmor = units::mhz(2.0);
  c.rabi = units::mhz(50.0);
  c.hyperfine_x = units::khz(30.0);
  c.cycles = 30;
  c.resonance_shift = 0.025;
  return c;
}

std::string config_to_text(const SweepConfig& cfg) {
  std::ostringstream out;
  for (const auto& e : entries()) out << e.key.name << " = " << e.get(cfg) << '\n';
  return out.str();
}

}  // namespace pulsepol::harness
