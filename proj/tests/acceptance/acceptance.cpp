// Acceptance suite. Prints one PASS/FAIL line per criterion; the exit code
// is non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "../dsl_generator.hpp"
#include "pulsepol/avgham.hpp"
#include "pulsepol/engine.hpp"
#include "pulsepol/harness.hpp"
#include "pulsepol/seqdsl.hpp"
#include "pulsepol/units.hpp"

using namespace pulsepol;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string cli_path;

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

SpinSystem single_nucleus(double a_x = units::khz(30)) {
  SpinSystem s;
  s.nuclei.push_back({units::mhz(2), a_x, 0.0});
  s.rabi = units::mhz(50);
  return s;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

// Maximum of y over x refined with a parabola through the best sample.
double refined_argmax(const std::vector<double>& x, const std::vector<double>& y) {
  const auto k = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (k == 0 || k + 1 == y.size()) return x[k];
  const double h = x[k + 1] - x[k];
  const double denom = y[k - 1] - 2 * y[k] + y[k + 1];
  if (denom == 0.0) return x[k];
  return x[k] + 0.5 * h * (y[k - 1] - y[k + 1]) / denom;
}

// Piecewise-exact projection of the modulation function on one harmonic.
double quadrature_coeff(int n, bool cosine) {
  double sum = 0.0;
  const int panels = 4000;
  for (int k = 0; k < 8; ++k) {
    const double lo = k / 8.0, hi = (k + 1) / 8.0;
    const double level = avgham::modulation_f1(0.5 * (lo + hi));
    const double h = (hi - lo) / panels;
    auto g = [&](double u) {
      return cosine ? std::cos(2 * units::kPi * n * u) : std::sin(2 * units::kPi * n * u);
    };
    double s = g(lo) + g(hi);
    for (int j = 1; j < panels; ++j) s += g(lo + j * h) * (j % 2 ? 4.0 : 2.0);
    sum += level * s * h / 3.0;
  }
  return 2.0 * sum;
}

Outcome fourier_closed_forms() {
  const double r2 = std::sqrt(2.0);
  double closed = std::abs(avgham::fourier_coeffs(1).a - 2 / units::kPi * (r2 - 1));
  closed = std::max(closed, std::abs(avgham::fourier_coeffs(3).a - 2 / (3 * units::kPi) * (r2 + 1)));
  double quad = 0.0;
  for (int n = 1; n <= 15; ++n) {
    const auto c = avgham::fourier_coeffs(n);
    quad = std::max(quad, std::abs(c.a - quadrature_coeff(n, true)));
    quad = std::max(quad, std::abs(c.b - quadrature_coeff(n, false)));
  }
  bool even_zero = true;
  for (int n = 2; n <= 16; n += 2) {
    const auto c = avgham::fourier_coeffs(n);
    even_zero = even_zero && c.a == 0.0 && c.b == 0.0;
  }
  return {closed <= 1e-12 && quad <= 1e-10 && even_zero,
          "closed-form error " + num(closed) + ", quadrature error " + num(quad) +
              ", even orders zero " + (even_zero ? "yes" : "no")};
}

Outcome alpha_and_ratio() {
  const double expected = 2 / (3 * units::kPi) * (2 + std::sqrt(2.0));
  const double err = std::abs(avgham::alpha(3) - expected);
  const double ratio = std::abs(avgham::fourier_coeffs(3).a) / std::abs(avgham::fourier_coeffs(1).a);
  return {err <= 1e-12 && std::abs(ratio - 1.94) <= 0.01,
          "alpha(3) = " + num(avgham::alpha(3), 10) + " (error " + num(err) + "), |a3|/|a1| = " +
              num(ratio, 5)};
}

Outcome detuning_cancellation() {
  SpinSystem sys = single_nucleus();
  sys.nuclei[0].hyperfine_z = units::khz(20);
  PulsePolParams p;
  p.larmor = sys.nuclei[0].larmor;
  p.rabi = sys.rabi;
  p.timing = Timing::kIdeal;
  const auto seq = build_pulsepol(p);
  const CMatrix ref = engine::sequence_propagator(sys, seq, {});
  double worst = 0.0;
  for (int k = 0; k <= 40; ++k) {
    ErrorModel err;
    err.detuning = (-0.5 + k / 40.0) * p.larmor;
    worst = std::max(worst, linalg::max_abs_diff(engine::sequence_propagator(sys, seq, err), ref));
  }
  return {worst <= 1e-9, "max |U(delta) - U(0)| = " + num(worst) + " over |delta| <= 0.5 omega_I"};
}

Outcome error_order() {
  SpinSystem bare;
  bare.rabi = units::mhz(50);
  PulsePolParams p;
  p.larmor = units::mhz(2);
  p.rabi = bare.rabi;
  std::vector<Element> pulses;
  for (const auto& e : build_pulsepol(p).cycle) {
    if (std::holds_alternative<Pulse>(e)) pulses.push_back(e);
  }
  const std::vector<double> eps{1e-3, 2e-3, 5e-3, 1e-2};
  const CMatrix minus_id = -CMatrix::Identity(2, 2);
  std::vector<double> le, lr, ld;
  CMatrix last_dev;
  for (double e : eps) {
    ErrorModel rabi_err;
    rabi_err.rabi_error_frac = e;
    ErrorModel det_err;
    det_err.detuning = e * bare.rabi;
    const CMatrix ur = engine::elements_propagator(bare, pulses, rabi_err);
    const CMatrix ud = engine::elements_propagator(bare, pulses, det_err);
    le.push_back(std::log(e));
    lr.push_back(std::log(linalg::max_abs_diff(ur, minus_id)));
    ld.push_back(std::log(linalg::max_abs_diff(ud, minus_id)));
    last_dev = ud - minus_id;
  }
  const double s_rabi = slope(le, lr);
  const double s_det = slope(le, ld);
  // Pauli components of the detuning deviation at the largest ε.
  const linalg::Complex c0 = last_dev.trace() / 2.0;
  const linalg::Complex cx = (last_dev(0, 1) + last_dev(1, 0)) / 2.0;
  const linalg::Complex cy = linalg::Complex(0, 1) * (last_dev(0, 1) - last_dev(1, 0)) / 2.0;
  const linalg::Complex cz = (last_dev(0, 0) - last_dev(1, 1)) / 2.0;
  const double off = std::sqrt(std::norm(c0) + std::norm(cx) + std::norm(cy)) / std::abs(cz);
  const bool ok = std::abs(s_rabi - 2.0) <= 0.1 && std::abs(s_det - 2.0) <= 0.1 && off < 0.05;
  return {ok, "slope(Rabi) = " + num(s_rabi) + ", slope(detuning) = " + num(s_det) +
                  ", off-sigma_z residual = " + num(off)};
}

Outcome effective_model() {
  const double ax = units::khz(30);
  const SpinSystem sys = single_nucleus(ax);
  PulsePolParams p;
  p.larmor = sys.nuclei[0].larmor;
  p.rabi = sys.rabi;
  auto seq = build_pulsepol(p);
  const double full = avgham::full_transfer_time(ax, 3);
  const double stated = avgham::stated_transfer_time(ax, 3);
  seq.repetitions = static_cast<std::size_t>(std::ceil(1.3 * stated / seq.cycle_duration()));
  const auto tr = engine::polarisation_trace(sys, seq, {}, engine::DensityState::initial(sys));

  // Exchange period from the exact trace: first maximum of the transfer.
  std::vector<double> ts, ys;
  for (std::size_t k = 0; k < tr.times.size() && tr.times[k] <= 0.75 * stated; ++k) {
    ts.push_back(tr.times[k]);
    ys.push_back(tr.transfer(k));
  }
  const double t_peak = refined_argmax(ts, ys);
  const bool short_convention = std::abs(t_peak - full) < std::abs(t_peak - stated);
  const double resolved = short_convention ? full : stated;
  const double period_err = std::abs(t_peak - resolved) / resolved;

  double worst = 0.0;
  double best = -1.0;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    best = std::max(best, tr.transfer(k));
    if (tr.times[k] > full) continue;
    worst = std::max(worst, std::abs(tr.transfer(k) - avgham::predict_transfer(ax, 3, tr.times[k])));
  }
  const bool ok = short_convention && period_err < 0.05 && worst <= 0.05 && best >= 0.99;
  return {ok, "exact peak at " + num(t_peak * 1e6) + " us, resolved exchange time " +
                  num(resolved * 1e6) + " us (" + (short_convention ? "2pi" : "4pi") +
                  "/(alpha A_x)), max |exact - model| = " + num(worst) + ", max transfer = " +
                  num(best)};
}

Outcome robustness_plateau() {
  harness::SweepConfig cfg = harness::default_config();
  cfg.detuning_min = units::mhz(-100);
  cfg.detuning_max = units::mhz(100);
  cfg.detuning_steps = 51;
  cfg.rabi_error_min = cfg.rabi_error_max = 0.0;
  cfg.rabi_error_steps = 1;
  const auto scan = harness::run_sweep(cfg);

  harness::SweepConfig cell = cfg;
  cell.detuning_min = cell.detuning_max = units::mhz(5);
  cell.detuning_steps = 1;
  cell.rabi_error_min = cell.rabi_error_max = 0.05;
  const auto off = harness::run_sweep(cell);

  const auto zero = static_cast<std::size_t>(
      std::find(scan.detunings.begin(), scan.detunings.end(), 0.0) - scan.detunings.begin());
  const double at_zero = scan.mean(zero, 0);
  const double at_off = off.mean(0, 0);
  double peak = 0.0, tail_sum = 0.0, tail_max = 0.0;
  int tail_n = 0;
  for (std::size_t i = 0; i < scan.detunings.size(); ++i) {
    const double m = scan.mean(i, 0);
    peak = std::max(peak, m);
    if (std::abs(scan.detunings[i]) > units::mhz(40) + 1.0) {
      tail_sum += m;
      tail_max = std::max(tail_max, m);
      ++tail_n;
    }
  }
  const double change = std::abs(at_off - at_zero) / at_zero;
  const double tail_mean = tail_sum / tail_n;
  const bool ok = zero < scan.detunings.size() && change <= 0.15 && tail_mean < 0.25 * peak;
  return {ok, "mean efficiency (0,0) = " + num(at_zero) + ", (5 MHz, 5%) = " + num(at_off) +
                  " (change " + num(100 * change, 3) + "%), |delta| > 40 MHz mean = " +
                  num(tail_mean) + " (max " + num(tail_max) + ") vs peak " + num(peak)};
}

double novel_peak(double detuning, double rabi_error) {
  const SpinSystem sys = single_nucleus();
  const auto seq = build_novel(sys.nuclei[0].larmor, sys.nuclei[0].larmor, 100e-6, sys.rabi);
  ErrorModel err;
  err.detuning = detuning;
  err.rabi_error_frac = rabi_error;
  engine::TraceOptions opt;
  opt.max_step = 50e-9;
  return engine::polarisation_trace(sys, seq, err, engine::DensityState::initial(sys), opt)
      .max_transfer();
}

Outcome novel_fragility() {
  const double clean = novel_peak(0.0, 0.0);
  const double det = novel_peak(units::mhz(0.5), 0.0);
  const double rabi = novel_peak(0.0, 0.02);
  const bool ok = det < 0.5 * clean && rabi < 0.5 * clean;
  return {ok, "peak transfer clean = " + num(clean) + ", delta 0.5 MHz = " + num(det) +
                  ", 2% Rabi error = " + num(rabi)};
}

// Resonance shift giving the largest transfer for a given phase error.
double best_shift(int n, double alpha_phi) {
  const SpinSystem sys = single_nucleus();
  std::vector<double> shifts, peaks;
  for (int k = 0; k < 49; ++k) {
    const double shift = -0.06 + 0.12 * k / 48;
    PulsePolParams p;
    p.larmor = sys.nuclei[0].larmor;
    p.rabi = sys.rabi;
    p.n = n;
    p.resonance_shift = shift;
    auto seq = apply_phase_error(build_pulsepol(p), alpha_phi);
    seq.repetitions = static_cast<std::size_t>(70e-6 / seq.cycle_duration());
    const auto tr = engine::polarisation_trace(sys, seq, {}, engine::DensityState::initial(sys));
    double m = 0.0;
    for (std::size_t j = 0; j < tr.times.size(); ++j) m = std::max(m, std::abs(tr.transfer(j)));
    shifts.push_back(shift);
    peaks.push_back(m);
  }
  return refined_argmax(shifts, peaks);
}

Outcome phase_shift_law() {
  const std::vector<double> alphas{-0.15, -0.1, -0.05, 0.0, 0.05, 0.1, 0.15};
  std::vector<double> s3, s5;
  for (double a : alphas) {
    s3.push_back(best_shift(3, a));
    s5.push_back(best_shift(5, a));
  }
  const double k3 = slope(alphas, s3);
  const double k5 = slope(alphas, s5);
  const double expected = 2 / (3 * units::kPi);
  const bool ok = std::abs(k3 - expected) <= 0.1 * expected && k5 * k3 < 0.0;
  return {ok, "n=3 slope = " + num(k3) + " (expected " + num(expected) + "), n=5 slope = " +
                  num(k5)};
}

// Half width of the region around zero detuning where the peak transfer
// stays at or above half of its zero-detuning value.
struct Plateau {
  double half_width_mhz = 0.0;
  double at_zero = 0.0;
};

Plateau plateau(bool composite) {
  const SpinSystem sys = single_nucleus();
  PulsePolParams p;
  p.larmor = sys.nuclei[0].larmor;
  p.rabi = sys.rabi;
  p.n = 5;
  auto seq = build_pulsepol(p);
  if (composite) seq = expand_composite(seq);
  seq.repetitions = static_cast<std::size_t>(300e-6 / seq.cycle_duration());
  auto peak = [&](double mhz) {
    ErrorModel err;
    err.detuning = units::mhz(mhz);
    const auto tr = engine::polarisation_trace(sys, seq, err, engine::DensityState::initial(sys));
    return tr.max_transfer();
  };
  Plateau out;
  out.at_zero = peak(0.0);
  for (int side : {-1, 1}) {
    double edge = 0.0;
    for (double d = 1.0; d <= 70.0; d += 1.0) {
      if (peak(side * d) < 0.5 * out.at_zero) break;
      edge = d;
    }
    out.half_width_mhz = side < 0 ? edge : std::min(out.half_width_mhz, edge);
  }
  return out;
}

Outcome composite_widening() {
  const Plateau comp = plateau(true);
  const Plateau plain = plateau(false);
  const bool ok = comp.half_width_mhz > 40.0 && comp.half_width_mhz > plain.half_width_mhz;
  return {ok, "half-transfer plateau composite +-" + num(comp.half_width_mhz) + " MHz (peak " +
                  num(comp.at_zero) + "), plain +-" + num(plain.half_width_mhz) + " MHz (peak " +
                  num(plain.at_zero) + ")"};
}

Outcome orientation() {
  const double d = units::mhz(2870);
  const double f = avgham::orientation_fraction(d, 1.5 * d * std::pow(std::sin(units::deg(6.5)), 2));
  return {std::abs(f - 0.113) <= 0.005, "fraction = " + num(f, 6)};
}

Outcome propi_buildup() {
  harness::SweepConfig cfg = harness::default_config();
  cfg.propi_cycles = 40;
  const auto res = harness::run_comparison(cfg, harness::parse_protocols("pulsepol,novel"),
                                           {0.0, units::mhz(20)});
  auto curve = [&](const std::string& name, double det) {
    std::vector<double> v;
    for (const auto& r : res.rows) {
      if (r.protocol == name && r.detuning == det) v.push_back(r.polarisation);
    }
    return v;
  };
  auto half = [&](const std::string& name, double det) {
    for (const auto& s : res.summary) {
      if (s.protocol == name && s.detuning == det) return s.cycles_to_half;
    }
    return std::numeric_limits<double>::infinity();
  };
  // Saturated: the last quarter of the curve moves by less than 5% of its end value.
  auto saturated = [](const std::vector<double>& v) {
    const std::size_t q = v.size() - v.size() / 4;
    return v.back() > 0.0 && std::abs(v.back() - v[q]) < 0.05 * v.back();
  };
  const auto pp0 = curve("pulsepol", 0.0), pp20 = curve("pulsepol", units::mhz(20));
  const auto nv0 = curve("novel", 0.0), nv20 = curve("novel", units::mhz(20));
  const double rate_ratio = half("pulsepol", 0.0) / half("novel", 0.0);
  double pp_dev = 0.0;
  for (std::size_t k = 0; k < pp0.size(); ++k) pp_dev = std::max(pp_dev, std::abs(pp20[k] - pp0[k]));
  const double pp_rel = pp_dev / pp0.back();
  const double nv_rel = nv20.back() / nv0.back();
  const bool ok = saturated(pp0) && saturated(nv0) && rate_ratio <= 1.5 && pp_rel <= 0.2 &&
                  nv_rel < 0.1;
  return {ok, "cycles to half saturation PulsePol/NOVEL = " + num(rate_ratio) +
                  ", PulsePol 20 MHz max deviation = " + num(100 * pp_rel, 3) +
                  "% of saturation, NOVEL 20 MHz/0 = " + num(100 * nv_rel, 3) + "%, saturated " +
                  (saturated(pp0) && saturated(nv0) ? "yes" : "no")};
}

Outcome dsl_round_trip() {
  testgen::AstGenerator gen(987654321);
  int failures = 0;
  const int count = 1200;
  for (int k = 0; k < count; ++k) {
    const auto ast = gen.ast();
    const std::string text = dsl::render(ast);
    try {
      if (!(dsl::parse(text) == ast) || dsl::render(dsl::parse(text)) != text) ++failures;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  PulsePolParams p;
  p.larmor = units::mhz(2);
  p.rabi = units::mhz(50);
  p.timing = Timing::kIdeal;
  const std::string golden =
      "[ (pi/2)_Y ~tau/4 (pi)_X ~tau/4 (pi/2)_Y (pi/2)_-X ~tau/4 (pi)_Y ~tau/4 (pi/2)_-X ]^2";
  const bool golden_ok = dsl::render(dsl::to_ast(build_pulsepol(p))) == golden;
  return {failures == 0 && golden_ok, std::to_string(count) + " generated sequences, " +
                                          std::to_string(failures) + " mismatches, golden " +
                                          (golden_ok ? "matches" : "differs")};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const std::vector<int> threads{1, 4, 2, 1};
  std::vector<std::string> outputs;
  std::string how;
  if (!cli_path.empty()) {
    const fs::path dir = fs::temp_directory_path() / ("pulsepol_determinism_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    for (std::size_t k = 0; k < threads.size(); ++k) {
      const fs::path out = dir / ("sweep_" + std::to_string(k) + ".csv");
      const std::string cmd = "\"" + cli_path +
                              "\" sweep --detuning-steps 7 --rabi-error-steps 3 --realizations 4"
                              " --cycles 10 --seed 42 --threads " +
                              std::to_string(threads[k]) + " --out \"" + out.string() + "\"";
      if (std::system(cmd.c_str()) != 0) return {false, "sweep command failed: " + cmd};
      outputs.push_back(read_file(out));
    }
    fs::remove_all(dir);
    how = "CLI sweep";
  } else {
    harness::SweepConfig cfg = harness::default_config();
    cfg.detuning_steps = 7;
    cfg.rabi_error_steps = 3;
    cfg.realizations = 4;
    cfg.cycles = 10;
    cfg.base_seed = 42;
    for (int t : threads) {
      cfg.threads = t;
      std::ostringstream out;
      harness::write_sweep_csv(out, harness::run_sweep(cfg));
      outputs.push_back(out.str());
    }
    how = "library sweep";
  }
  bool same = !outputs.front().empty();
  for (const auto& o : outputs) same = same && o == outputs.front();
  return {same, how + " with threads 1,4,2,1: " + (same ? "byte-identical" : "outputs differ") +
                    " (" + std::to_string(outputs.front().size()) + " bytes)"};
}

std::vector<Criterion> criteria() {
  return {
      {1, "Fourier closed forms and quadrature", 1.0, fourier_closed_forms},
      {2, "effective coupling and harmonic ratio", 1.0, alpha_and_ratio},
      {3, "detuning cancellation with ideal pulses", 1.0, detuning_cancellation},
      {4, "second-order error scaling", 10.0, error_order},
      {5, "exact dynamics vs averaged model", 60.0, effective_model},
      {6, "robustness plateau over lattice baths", 900.0, robustness_plateau},
      {7, "NOVEL fragility", 60.0, novel_fragility},
      {8, "phase-error resonance shift", 600.0, phase_shift_law},
      {9, "composite-pulse widening", 900.0, composite_widening},
      {10, "orientation fraction", 1.0, orientation},
      {11, "PROPI buildup", 900.0, propi_buildup},
      {12, "sequence text round trip", 10.0, dsl_round_trip},
      {13, "sweep determinism across thread counts", 900.0, determinism},
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulsepol acceptance suite"};
  std::vector<int> only;
  app.add_option("--only", only, "run only these criterion ids");
  app.add_option("--cli", cli_path, "pulsepol executable used by the determinism check");
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << " (" << num(secs, 3) << " s" << (in_time ? "" : ", over the time limit") << ")"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
