// Command-line front end: simulations, sweeps, protocol comparisons and
// sequence text utilities.

#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pulsepol/avgham.hpp"
#include "pulsepol/config.hpp"
#include "pulsepol/engine.hpp"
#include "pulsepol/error.hpp"
#include "pulsepol/format.hpp"
#include "pulsepol/harness.hpp"
#include "pulsepol/seqdsl.hpp"
#include "pulsepol/units.hpp"

namespace {

using namespace pulsepol;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> keyed;  // from --<key> flags
  std::string out;
  std::int64_t seed = -1;
  int threads = 0;
};

std::string flag_name(const std::string& key) {
  std::string out = key;
  for (auto& c : out) {
    if (c == '_') c = '-';
  }
  return out;
}

void add_common(CLI::App* app, Common& c, std::vector<std::string>& key_values) {
  app->add_option("--config", c.config_path, "key = value config file");
  app->add_option("--set", c.sets, "override one key (key=value), repeatable");
  app->add_option("--out", c.out, "output CSV path (default: stdout)");
  app->add_option("--seed", c.seed, "base seed");
  app->add_option("--threads", c.threads, "worker threads");
  const auto& keys = harness::config_keys();
  key_values.resize(keys.size());
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (keys[k].name == "seed" || keys[k].name == "threads") continue;
    app->add_option("--" + flag_name(keys[k].name), key_values[k], keys[k].help);
  }
}

harness::SweepConfig resolve(const Common& c, const std::vector<std::string>& key_values) {
  harness::SweepConfig cfg = harness::default_config();
  if (!c.config_path.empty()) cfg = harness::load_config(c.config_path, cfg);
  const auto& keys = harness::config_keys();
  for (std::size_t k = 0; k < keys.size() && k < key_values.size(); ++k) {
    if (!key_values[k].empty()) harness::set_config_value(cfg, keys[k].name, key_values[k]);
  }
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set", "expected key=value, got '" + s + "'");
    harness::set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(c.seed);
  if (c.threads > 0) cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("--out", "cannot open '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<double> parse_mhz_list(const std::string& text, const char* field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(units::mhz(v));
    } catch (const std::exception&) {
      throw ConfigError(field, "bad number '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(field, "empty list");
  return out;
}

std::string read_all(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("file", "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(int argc, char** argv) {
  CLI::App app{"Pulsed dynamic nuclear polarisation simulator"};
  app.require_subcommand(1);

  Common sim_c, sweep_c, cmp_c, propi_c, depol_c, render_c;
  std::vector<std::string> sim_k, sweep_k, cmp_k, propi_k, depol_k, render_k;

  auto* sim = app.add_subcommand("simulate", "polarisation trace for one system");
  add_common(sim, sim_c, sim_k);
  int sim_real = 0;
  sim->add_option("--realization", sim_real, "lattice realization index");

  auto* sweep = app.add_subcommand("sweep", "robustness sweep over detuning and Rabi error");
  add_common(sweep, sweep_c, sweep_k);

  std::string protocols = "pulsepol,novel,ise:12";
  std::string detunings = "0,20";
  auto* cmp = app.add_subcommand("compare", "polarisation buildup of several protocols");
  add_common(cmp, cmp_c, cmp_k);
  cmp->add_option("--protocols", protocols, "comma list: pulsepol, novel, polxy, ise:<MHz>");
  cmp->add_option("--detunings-mhz", detunings, "comma list of detunings, MHz");

  std::string propi_protocol = "pulsepol";
  auto* propi = app.add_subcommand("propi", "buildup of one protocol");
  add_common(propi, propi_c, propi_k);
  propi->add_option("--protocol", propi_protocol, "pulsepol, novel, polxy or ise:<MHz>");

  std::string depol_protocols = "pulsepol";
  std::string depol_detunings = "0";
  auto* depol = app.add_subcommand("depol", "retention of a pre-polarised bath");
  add_common(depol, depol_c, depol_k);
  depol->add_option("--protocols", depol_protocols, "comma list of protocols");
  depol->add_option("--detunings-mhz", depol_detunings, "comma list of detunings, MHz");

  int n_max = 15;
  auto* fourier = app.add_subcommand("fourier", "modulation-function coefficients");
  fourier->add_option("--n-max", n_max, "largest order");

  double d_mhz = 2870.0;
  double window_deg = 6.5;
  double max_det_mhz = -1.0;
  auto* orient = app.add_subcommand("orientation", "fraction of usable NV orientations");
  orient->add_option("--d-mhz", d_mhz, "zero-field splitting, MHz");
  orient->add_option("--window-deg", window_deg, "angular half-window around 90 degrees");
  orient->add_option("--max-detuning-mhz", max_det_mhz, "detuning tolerance, MHz (overrides window)");

  auto* seq = app.add_subcommand("seq", "sequence text utilities");
  seq->require_subcommand(1);
  std::string parse_path = "-";
  double parse_tau_ns = 0.0;
  auto* seq_parse = seq->add_subcommand("parse", "check a sequence file and summarise it");
  seq_parse->add_option("file", parse_path, "sequence file, '-' for stdin");
  seq_parse->add_option("--tau-ns", parse_tau_ns, "binding for tau, ns");
  auto* seq_render = seq->add_subcommand("render", "print the sequence built from a config");
  add_common(seq_render, render_c, render_k);

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    const auto cfg = resolve(sim_c, sim_k);
    const auto system = harness::build_system(cfg, sim_real);
    const auto sequence = harness::build_sequence(cfg, static_cast<std::size_t>(cfg.cycles));
    ErrorModel err;
    err.detuning = cfg.detuning;
    err.rabi_error_frac = cfg.rabi_error;
    const auto init = engine::DensityState::initial(system, cfg.nuclear_init);
    const auto trace = engine::polarisation_trace(system, sequence, err, init,
                                                  {cfg.sample_every, cfg.max_step});
    Output out(sim_c.out);
    engine::write_trace_csv(out.stream(), trace);
    std::cerr << "max transfer " << format_double(trace.max_transfer()) << '\n';
  } else if (sweep->parsed()) {
    const auto cfg = resolve(sweep_c, sweep_k);
    const auto res = harness::run_sweep(cfg);
    Output out(sweep_c.out);
    harness::write_sweep_csv(out.stream(), res);
  } else if (cmp->parsed() || propi->parsed()) {
    const bool is_cmp = cmp->parsed();
    const auto cfg = is_cmp ? resolve(cmp_c, cmp_k) : resolve(propi_c, propi_k);
    const auto list = harness::parse_protocols(is_cmp ? protocols : propi_protocol);
    const auto dets = is_cmp ? parse_mhz_list(detunings, "detunings-mhz")
                             : std::vector<double>{cfg.detuning};
    const auto res = harness::run_comparison(cfg, list, dets);
    Output out(is_cmp ? cmp_c.out : propi_c.out);
    harness::write_comparison_csv(out.stream(), res);
    for (const auto& s : res.summary) {
      std::cerr << s.protocol << " detuning " << format_double(units::to_mhz(s.detuning))
                << " MHz: final " << format_double(s.final_polarisation)
                << ", cycles to half " << format_double(s.cycles_to_half) << '\n';
    }
  } else if (depol->parsed()) {
    const auto cfg = resolve(depol_c, depol_k);
    const auto rows = harness::run_depolarisation(cfg, harness::parse_protocols(depol_protocols),
                                                  parse_mhz_list(depol_detunings, "detunings-mhz"));
    Output out(depol_c.out);
    harness::write_depolarisation_csv(out.stream(), rows);
  } else if (fourier->parsed()) {
    if (n_max < 1) throw ConfigError("n-max", "must be >= 1");
    std::cout << "n,a_n,b_n,alpha\n";
    for (int n = 1; n <= n_max; ++n) {
      const auto c = avgham::fourier_coeffs(n);
      std::cout << n << ',' << format_double(c.a) << ',' << format_double(c.b) << ','
                << format_double(std::hypot(c.a, c.b)) << '\n';
    }
  } else if (orient->parsed()) {
    const double d = units::mhz(d_mhz);
    const double cut = std::cos(units::deg(90.0 - window_deg));
    const double max_det = max_det_mhz >= 0.0 ? units::mhz(max_det_mhz) : 1.5 * d * cut * cut;
    std::cout << format_double(avgham::orientation_fraction(d, max_det)) << '\n';
  } else if (seq_parse->parsed()) {
    std::string text = read_all(parse_path);
    if (!text.empty() && text.back() == '\n') text.pop_back();
    const auto ast = dsl::parse(text);
    dsl::Bindings b;
    b.tau = parse_tau_ns * 1e-9;
    b.rabi = units::mhz(50.0);
    std::cout << dsl::render(ast) << '\n';
    if (b.tau > 0.0) {
      const auto elems = dsl::lower(ast, b);
      double total = 0.0;
      for (const auto& e : elems) total += element_duration(e);
      std::cout << elems.size() << " elements, " << format_double(total * 1e9) << " ns\n";
    }
  } else if (seq_render->parsed()) {
    const auto cfg = resolve(render_c, render_k);
    const auto s = harness::build_sequence(cfg, static_cast<std::size_t>(cfg.cycles));
    Output out(render_c.out);
    out.stream() << dsl::render(dsl::to_ast(s)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const pulsepol::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pulsepol::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pulsepol::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pulsepol::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
