#include "pulsepol/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "pulsepol/error.hpp"
#include "pulsepol/format.hpp"
#include "pulsepol/seeding.hpp"
#include "pulsepol/units.hpp"

namespace pulsepol::harness {

std::uint64_t realization_seed(std::uint64_t base_seed, int realization) {
  return seeding::mix(base_seed, static_cast<std::uint64_t>(realization));
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1) throw InvalidArgument("linspace: steps must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    out[k] = steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1);
  }
  return out;
}

namespace {

PulseSequence pulsepol_family(const SweepConfig& cfg, std::size_t blocks) {
  PulsePolParams p;
  p.larmor = cfg.larmor;
  p.rabi = cfg.rabi;
  p.n = cfg.sequence.n;
  p.blocks = blocks;
  p.timing = cfg.sequence.timing;
  p.resonance_shift = cfg.resonance_shift;
  if (cfg.sequence.kind == "pulsepol-yx") p.variant = PulsePolVariant::kYX;
  if (cfg.sequence.kind == "pulsepol-combined") p.variant = PulsePolVariant::kCombined;
  PulseSequence seq = build_pulsepol(p);
  const double alpha_phi = cfg.effective_phase_error();
  if (alpha_phi != 0.0) seq = apply_phase_error(seq, alpha_phi);
  if (cfg.sequence.composite) seq = expand_composite(seq);
  return seq;
}

double lock_rabi(const SweepConfig& cfg) {
  return cfg.sequence.lock_rabi > 0.0 ? cfg.sequence.lock_rabi : cfg.larmor;
}

double ise_inverse_rate(const SweepConfig& cfg) {
  return cfg.sequence.inverse_rate > 0.0 ? cfg.sequence.inverse_rate
                                         : 3e-6 / units::mhz(1.0);
}

PulseSequence ise_sequence(const SweepConfig& cfg, double range) {
  const double rabi = cfg.ise_rabi > 0.0 ? cfg.ise_rabi : lock_rabi(cfg);
  return build_ise(rabi, range, ise_inverse_rate(cfg), phase::kX, cfg.rabi);
}

std::size_t matched_blocks(const SweepConfig& cfg, double cycle_duration) {
  if (cfg.pulsepol_blocks > 0) return static_cast<std::size_t>(cfg.pulsepol_blocks);
  const double k = std::round(cfg.sequence.lock_duration / cycle_duration);
  return static_cast<std::size_t>(std::max(1.0, k));
}

}  // namespace

PulseSequence build_sequence(const SweepConfig& cfg, std::size_t blocks) {
  const auto& kind = cfg.sequence.kind;
  if (kind.rfind("pulsepol", 0) == 0) return pulsepol_family(cfg, blocks);
  if (kind == "polxy") {
    return build_polxy(cfg.larmor, cfg.rabi, cfg.sequence.n, blocks, cfg.sequence.timing);
  }
  if (kind == "novel") {
    return build_novel(cfg.larmor, lock_rabi(cfg), cfg.sequence.lock_duration, cfg.rabi);
  }
  if (kind == "ise") return ise_sequence(cfg, cfg.sequence.sweep_range);
  throw ConfigError("sequence", "unknown sequence '" + kind + "'");
}

SpinSystem build_system(const SweepConfig& cfg, int realization) {
  if (cfg.bath == "single") {
    SpinSystem sys;
    sys.rabi = cfg.rabi;
    sys.nuclei.push_back({cfg.larmor, cfg.hyperfine_x, cfg.hyperfine_z});
    return sys;
  }
  const auto real = lattice::sample_realization(
      realization_seed(cfg.base_seed, realization), cfg.nuclei);
  return lattice::to_spin_system(real, cfg.larmor, cfg.rabi);
}

double SweepResult::value(std::size_t i_det, std::size_t i_rabi, std::size_t r) const {
  return values[(i_rabi * detunings.size() + i_det) * seeds.size() + r];
}

double SweepResult::mean(std::size_t i_det, std::size_t i_rabi) const {
  double acc = 0.0;
  for (std::size_t r = 0; r < seeds.size(); ++r) acc += value(i_det, i_rabi, r);
  return acc / static_cast<double>(seeds.size());
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult res;
  res.config = cfg;
  res.detunings = linspace(cfg.detuning_min, cfg.detuning_max, cfg.detuning_steps);
  res.rabi_errors = linspace(cfg.rabi_error_min, cfg.rabi_error_max, cfg.rabi_error_steps);
  const int reals = cfg.bath == "single" ? 1 : cfg.realizations;
  std::vector<SpinSystem> systems;
  for (int r = 0; r < reals; ++r) {
    res.seeds.push_back(cfg.bath == "single" ? cfg.base_seed
                                             : realization_seed(cfg.base_seed, r));
    systems.push_back(build_system(cfg, r));
  }
  const PulseSequence seq = build_sequence(cfg, static_cast<std::size_t>(cfg.cycles));
  const double t_final = seq.duration();
  const std::size_t nd = res.detunings.size();
  const std::size_t nr = res.rabi_errors.size();
  const std::size_t ns = systems.size();
  res.values.assign(nd * nr * ns, 0.0);
  parallel_for(res.values.size(), cfg.threads, [&](std::size_t idx) {
    const std::size_t r = idx % ns;
    const std::size_t cell = idx / ns;
    ErrorModel err;
    err.detuning = res.detunings[cell % nd];
    err.rabi_error_frac = res.rabi_errors[cell / nd];
    err.resonance_shift = cfg.resonance_shift;
    res.values[idx] = engine::transfer_efficiency(systems[r], seq, err, t_final);
  });
  return res;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "detuning_rad_s,rabi_error_frac,realization,efficiency,seed\n";
  for (std::size_t ir = 0; ir < result.rabi_errors.size(); ++ir) {
    for (std::size_t id = 0; id < result.detunings.size(); ++id) {
      for (std::size_t r = 0; r < result.seeds.size(); ++r) {
        out << format_double(result.detunings[id]) << ','
            << format_double(result.rabi_errors[ir]) << ',' << r << ','
            << format_double(result.value(id, ir, r)) << ',' << result.seeds[r] << '\n';
      }
    }
  }
}

std::vector<ProtocolSpec> parse_protocols(const std::string& list) {
  std::vector<ProtocolSpec> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item.rfind("ise:", 0) == 0) {
      double mhz = 0.0;
      const char* first = item.data() + 4;
      const char* last = item.data() + item.size();
      const auto res = std::from_chars(first, last, mhz);
      if (res.ec != std::errc{} || res.ptr != last || !(mhz > 0.0)) {
        throw ConfigError("protocols", "bad ISE range in '" + item + "'");
      }
    } else if (item != "pulsepol" && item != "novel" && item != "polxy") {
      throw ConfigError("protocols", "unknown protocol '" + item + "'");
    }
    out.push_back({item});
  }
  if (out.empty()) throw ConfigError("protocols", "no protocol given");
  return out;
}

PulseSequence protocol_sequence(const SweepConfig& cfg, const ProtocolSpec& p) {
  if (p.name == "novel") {
    return build_novel(cfg.larmor, lock_rabi(cfg), cfg.sequence.lock_duration, cfg.rabi);
  }
  if (p.name.rfind("ise:", 0) == 0) {
    double mhz = 0.0;
    try {
      mhz = std::stod(p.name.substr(4));
    } catch (const std::exception&) {
      throw ConfigError("protocols", "bad ISE range in '" + p.name + "'");
    }
    return ise_sequence(cfg, units::mhz(mhz));
  }
  if (p.name == "polxy") {
    const auto one = build_polxy(cfg.larmor, cfg.rabi, cfg.sequence.n, 1, cfg.sequence.timing);
    return build_polxy(cfg.larmor, cfg.rabi, cfg.sequence.n,
                       matched_blocks(cfg, one.cycle_duration()), cfg.sequence.timing);
  }
  SweepConfig pp = cfg;
  pp.sequence.kind = "pulsepol";
  const auto one = pulsepol_family(pp, 1);
  return pulsepol_family(pp, matched_blocks(cfg, one.cycle_duration()));
}

namespace {

// First interpolated cycle reaching half of the final (saturated) value.
double cycles_to_half(const std::vector<double>& curve) {
  const double target = 0.5 * curve.back();
  if (!(target > 0.0)) return std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < curve.size(); ++k) {
    if (curve[k] >= target) {
      const double prev = curve[k - 1];
      const double frac = curve[k] > prev ? (target - prev) / (curve[k] - prev) : 1.0;
      return static_cast<double>(k - 1) + std::clamp(frac, 0.0, 1.0);
    }
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

ComparisonResult run_comparison(const SweepConfig& cfg,
                                const std::vector<ProtocolSpec>& protocols,
                                const std::vector<double>& detunings) {
  cfg.validate();
  const auto nr = static_cast<std::size_t>(cfg.realizations);
  std::vector<SpinSystem> systems;
  for (std::size_t r = 0; r < nr; ++r) systems.push_back(build_system(cfg, static_cast<int>(r)));
  ComparisonResult res;
  res.nuclei = systems.front().num_nuclei();
  const std::size_t np = protocols.size();
  std::vector<PulseSequence> seqs;
  for (const auto& p : protocols) seqs.push_back(protocol_sequence(cfg, p));
  // idx = (d * np + p) * nr + r
  std::vector<engine::BuildupCurve> curves(detunings.size() * np * nr);
  parallel_for(curves.size(), cfg.threads, [&](std::size_t idx) {
    const std::size_t r = idx % nr;
    const std::size_t p = (idx / nr) % np;
    const std::size_t d = idx / (nr * np);
    ErrorModel err;
    err.detuning = detunings[d];
    err.rabi_error_frac = cfg.rabi_error;
    const auto init = engine::DensityState::initial(systems[r], engine::NuclearInit::kMixed);
    curves[idx] = engine::propi_run(systems[r], seqs[p], err, cfg.propi_cycles, init,
                                    {cfg.reset_fidelity});
  });
  for (std::size_t d = 0; d < detunings.size(); ++d) {
    for (std::size_t p = 0; p < np; ++p) {
      std::vector<double> mean(static_cast<std::size_t>(cfg.propi_cycles) + 1, 0.0);
      for (std::size_t r = 0; r < nr; ++r) {
        const auto& c = curves[(d * np + p) * nr + r];
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += c.polarisation[k];
      }
      for (auto& v : mean) v /= static_cast<double>(nr);
      for (std::size_t k = 0; k < mean.size(); ++k) {
        res.rows.push_back({protocols[p].name, detunings[d], static_cast<int>(k), mean[k]});
      }
      res.summary.push_back({protocols[p].name, detunings[d], mean.back(),
                             cycles_to_half(mean)});
    }
  }
  return res;
}

void write_comparison_csv(std::ostream& out, const ComparisonResult& result) {
  out << "protocol,detuning_rad_s,cycle,polarisation\n";
  for (const auto& r : result.rows) {
    out << r.protocol << ',' << format_double(r.detuning) << ',' << r.cycle << ','
        << format_double(r.polarisation) << '\n';
  }
}

std::vector<DepolarisationRow> run_depolarisation(const SweepConfig& cfg,
                                                  const std::vector<ProtocolSpec>& protocols,
                                                  const std::vector<double>& detunings) {
  cfg.validate();
  const auto nr = static_cast<std::size_t>(cfg.realizations);
  std::vector<SpinSystem> systems;
  for (std::size_t r = 0; r < nr; ++r) systems.push_back(build_system(cfg, static_cast<int>(r)));
  const std::size_t np = protocols.size();
  std::vector<PulseSequence> seqs;
  for (const auto& p : protocols) seqs.push_back(protocol_sequence(cfg, p));
  std::vector<double> retained(detunings.size() * np * nr);
  parallel_for(retained.size(), cfg.threads, [&](std::size_t idx) {
    const std::size_t r = idx % nr;
    const auto& seq = seqs[(idx / nr) % np];
    const auto init = engine::DensityState::initial(
        systems[r], seq.pump_sign > 0 ? engine::NuclearInit::kUp : engine::NuclearInit::kDown);
    ErrorModel err;
    err.detuning = detunings[idx / (nr * np)];
    err.rabi_error_frac = cfg.rabi_error;
    const auto curve =
        engine::propi_run(systems[r], seq, err, cfg.propi_cycles, init, {cfg.reset_fidelity});
    retained[idx] = curve.polarisation.back() / curve.polarisation.front();
  });
  std::vector<DepolarisationRow> rows;
  for (std::size_t d = 0; d < detunings.size(); ++d) {
    for (std::size_t p = 0; p < np; ++p) {
      double sum = 0.0;
      for (std::size_t r = 0; r < nr; ++r) sum += retained[(d * np + p) * nr + r];
      rows.push_back({protocols[p].name, detunings[d], sum / static_cast<double>(nr)});
    }
  }
  return rows;
}

void write_depolarisation_csv(std::ostream& out, const std::vector<DepolarisationRow>& rows) {
  out << "protocol,detuning_rad_s,retained\n";
  for (const auto& r : rows) {
    out << r.protocol << ',' << format_double(r.detuning) << ',' << format_double(r.retained)
        << '\n';
  }
}

std::vector<double> moving_average(const std::vector<double>& v, int window) {
  if (window < 1 || window % 2 == 0) {
    throw InvalidArgument("moving_average: window must be odd and >= 1");
  }
  const int half = window / 2;
  const int n = static_cast<int>(v.size());
  std::vector<double> out(v.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += v[j];
    out[i] = acc / (hi - lo + 1);
  }
  return out;
}

}  // namespace pulsepol::harness
