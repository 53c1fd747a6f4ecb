#include "pulsepol/sequence.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pulsepol/avgham.hpp"
#include "pulsepol/error.hpp"

namespace pulsepol {

namespace {

constexpr double kPi = std::numbers::pi;

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

struct BracketPulse {
  double angle;
  double phase;
};

// Pulse layout of one bracket; delays sit after entries 0, 1, 3 and 4.
std::vector<BracketPulse> bracket_pulses(bool yx) {
  if (yx) {
    return {{kPi / 2, phase::kY}, {kPi, phase::kY},      {kPi / 2, phase::kMinusY},
            {kPi / 2, phase::kX}, {kPi, phase::kX},      {kPi / 2, phase::kMinusX}};
  }
  return {{kPi / 2, phase::kY},      {kPi, phase::kX}, {kPi / 2, phase::kY},
          {kPi / 2, phase::kMinusX}, {kPi, phase::kY}, {kPi / 2, phase::kMinusX}};
}

void append_bracket(std::vector<Element>& out, bool yx, double rabi, bool ideal,
                    Delay delay) {
  const auto pulses = bracket_pulses(yx);
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    out.push_back(Pulse{pulses[k].angle, pulses[k].phase, rabi, ideal});
    if (k == 0 || k == 1 || k == 3 || k == 4) out.push_back(delay);
  }
}

void check_budget(double tau_free, double longest_pulse, int n) {
  if (!(tau_free > 0.0) || !(longest_pulse < kPulseBudget * tau_free)) {
    throw InvalidArgument(
        "pulse time budget exceeded for n=" + std::to_string(n) +
        " (longest pulse must stay below 20% of the free evolution); "
        "use a larger n or a stronger drive");
  }
}

int family_pump_sign(int n) { return avgham::pump_direction(SequenceKind::kPulsePol, n); }

}  // namespace

double element_duration(const Element& e) {
  return std::visit(
      [](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Pulse>) {
          return x.duration();
        } else {
          return x.duration;
        }
      },
      e);
}

namespace {
double sum_durations(const std::vector<Element>& v) {
  double t = 0.0;
  for (const auto& e : v) t += element_duration(e);
  return t;
}
}  // namespace

double PulseSequence::cycle_duration() const { return sum_durations(cycle); }
double PulseSequence::prefix_duration() const { return sum_durations(prefix); }

double PulseSequence::duration() const {
  return sum_durations(prefix) +
         static_cast<double>(repetitions) * sum_durations(cycle) +
         sum_durations(suffix);
}

std::vector<Element> PulseSequence::elements() const {
  std::vector<Element> out(prefix);
  out.reserve(prefix.size() + cycle.size() * repetitions + suffix.size());
  for (std::size_t r = 0; r < repetitions; ++r) {
    out.insert(out.end(), cycle.begin(), cycle.end());
  }
  out.insert(out.end(), suffix.begin(), suffix.end());
  return out;
}

PulseSequence build_pulsepol(const PulsePolParams& p) {
  require_positive(p.larmor, "larmor");
  require_positive(p.rabi, "rabi");
  if (p.n < 1 || p.n % 2 == 0) {
    throw InvalidArgument("PulsePol resonance order n must be odd and >= 1, got " +
                          std::to_string(p.n));
  }
  if (!(p.resonance_shift > -1.0)) {
    throw InvalidArgument("resonance_shift must be > -1");
  }
  PulseSequence seq;
  seq.kind = SequenceKind::kPulsePol;
  seq.variant = p.variant;
  seq.timing = p.timing;
  seq.n = p.n;
  seq.larmor = p.larmor;
  seq.rabi = p.rabi;
  seq.resonance_shift = p.resonance_shift;
  seq.tau = p.n * kPi / p.larmor * (1.0 + p.resonance_shift);
  seq.pump_sign = family_pump_sign(p.n);
  seq.repetitions = p.blocks;

  const bool ideal = p.timing == Timing::kIdeal;
  Delay delay;
  if (ideal) {
    delay = {seq.tau / 4.0, DelaySymbol::kTauQuarter};
  } else {
    const double tau_free = seq.tau - 4.0 * kPi / p.rabi;
    check_budget(tau_free, kPi / p.rabi, p.n);
    delay = {tau_free / 4.0, DelaySymbol::kNone};
  }
  switch (p.variant) {
    case PulsePolVariant::kStandard:
      seq.name = "pulsepol";
      for (int b = 0; b < 2; ++b) append_bracket(seq.cycle, false, p.rabi, ideal, delay);
      break;
    case PulsePolVariant::kYX:
      seq.name = "pulsepol-yx";
      for (int b = 0; b < 2; ++b) append_bracket(seq.cycle, true, p.rabi, ideal, delay);
      break;
    case PulsePolVariant::kCombined:
      seq.name = "pulsepol-combined";
      for (int b = 0; b < 2; ++b) append_bracket(seq.cycle, false, p.rabi, ideal, delay);
      for (int b = 0; b < 2; ++b) append_bracket(seq.cycle, true, p.rabi, ideal, delay);
      break;
  }
  return seq;
}

PulseSequence build_polxy(double larmor, double rabi, int n, std::size_t reps,
                          Timing timing) {
  require_positive(larmor, "larmor");
  require_positive(rabi, "rabi");
  if (n < 1) throw InvalidArgument("PolXY resonance order n must be >= 1");
  PulseSequence seq;
  seq.name = "polxy";
  seq.kind = SequenceKind::kPolXY;
  seq.timing = timing;
  seq.n = n;
  seq.larmor = larmor;
  seq.rabi = rabi;
  seq.tau = n * kPi / larmor;
  seq.pump_sign = family_pump_sign(n);
  seq.repetitions = reps;
  const bool ideal = timing == Timing::kIdeal;
  const double tau = seq.tau;

  auto pulse = [&](double angle, double ph) { return Pulse{angle, ph, rabi, ideal}; };
  auto delay = [&](double d, DelaySymbol s) { return Delay{d, ideal ? s : DelaySymbol::kNone}; };

  seq.prefix.push_back(pulse(kPi / 2, phase::kY));
  auto& c = seq.cycle;
  c.push_back(delay(tau / 2, DelaySymbol::kTauHalf));
  c.push_back(pulse(kPi, phase::kX));
  c.push_back(delay(tau, DelaySymbol::kTau));
  c.push_back(pulse(kPi, phase::kY));
  c.push_back(delay(tau, DelaySymbol::kTau));
  c.push_back(pulse(kPi, phase::kX));
  c.push_back(delay(tau, DelaySymbol::kTau));
  c.push_back(pulse(kPi, phase::kY));
  c.push_back(delay(tau / 2, DelaySymbol::kTauHalf));
  c.push_back(pulse(kPi / 2, phase::kX));
  c.push_back(delay(tau, DelaySymbol::kTau));
  c.push_back(pulse(kPi, phase::kY));
  c.push_back(delay(tau, DelaySymbol::kTau));
  c.push_back(pulse(kPi, phase::kX));
  c.push_back(delay(tau, DelaySymbol::kTau));
  c.push_back(pulse(kPi, phase::kY));
  c.push_back(delay(tau, DelaySymbol::kTau));
  c.push_back(pulse(kPi / 2, phase::kX));
  seq.suffix.push_back(pulse(kPi / 2, phase::kMinusY));

  if (!ideal) {
    // Keep pulse centres on the ideal grid: each delay loses half of each
    // neighbouring pulse. The cycle is periodic, and the prefix pulse has
    // the same length as the cycle's last pulse.
    const std::size_t m = c.size();
    for (std::size_t k = 0; k < m; ++k) {
      auto* d = std::get_if<Delay>(&c[k]);
      if (!d) continue;
      const double before = element_duration(c[(k + m - 1) % m]);
      const double after = element_duration(c[(k + 1) % m]);
      d->duration -= 0.5 * (before + after);
      if (!(d->duration > 0.0)) {
        throw InvalidArgument("PolXY pulses do not fit into tau for n=" +
                              std::to_string(n) + "; use a larger n");
      }
    }
  }
  return seq;
}

PulseSequence build_novel(double larmor, double lock_rabi, double lock_duration,
                          std::optional<double> pulse_rabi) {
  require_positive(larmor, "larmor");
  require_positive(lock_rabi, "lock_rabi");
  if (!(lock_duration >= 0.0)) throw InvalidArgument("lock_duration must be >= 0");
  const double prep = pulse_rabi.value_or(lock_rabi);
  require_positive(prep, "pulse_rabi");
  PulseSequence seq;
  seq.name = "novel";
  seq.kind = SequenceKind::kNovel;
  seq.larmor = larmor;
  seq.rabi = lock_rabi;
  seq.pump_sign = avgham::pump_direction(SequenceKind::kNovel, 0);
  seq.cycle.push_back(Pulse{kPi / 2, phase::kY, prep, false});
  if (lock_duration > 0.0) {
    seq.cycle.push_back(Pulse{lock_rabi * lock_duration, phase::kX, lock_rabi, false});
  }
  return seq;
}

PulseSequence build_ise(double center_rabi, double sweep_range,
                        double inverse_rate, double lock_phase,
                        std::optional<double> pulse_rabi) {
  require_positive(center_rabi, "center_rabi");
  require_positive(sweep_range, "sweep_range");
  require_positive(inverse_rate, "inverse_rate");
  const double prep = pulse_rabi.value_or(center_rabi);
  require_positive(prep, "pulse_rabi");
  PulseSequence seq;
  seq.name = "ise";
  seq.kind = SequenceKind::kIse;
  seq.rabi = center_rabi;
  seq.pump_sign = avgham::pump_direction(SequenceKind::kIse, 0);
  seq.cycle.push_back(Pulse{kPi / 2, phase::kY, prep, false});
  seq.cycle.push_back(Chirp{sweep_range * inverse_rate, center_rabi,
                            0.5 * sweep_range, -0.5 * sweep_range, lock_phase});
  return seq;
}

const std::vector<CompositeEntry>& composite_half_pi() {
  static const std::vector<CompositeEntry> table = {
      {16, true}, {300, false}, {266, true}, {54, false},
      {266, true}, {300, false}, {16, true}};
  return table;
}

const std::vector<CompositeEntry>& composite_pi() {
  static const std::vector<CompositeEntry> table = {
      {325, false}, {263, true}, {56, false}, {263, true}, {325, false}};
  return table;
}

double composite_total_degrees(const std::vector<CompositeEntry>& entries) {
  double total = 0.0;
  for (const auto& e : entries) total += e.degrees;
  return total;
}

PulseSequence expand_composite(const PulseSequence& seq) {
  if (seq.kind != SequenceKind::kPulsePol) {
    throw InvalidArgument("expand_composite: only PulsePol-family sequences are supported");
  }
  if (seq.composite) throw InvalidArgument("expand_composite: sequence already expanded");
  const double rabi = seq.rabi;
  const double half_deg = composite_total_degrees(composite_half_pi());
  const double pi_deg = composite_total_degrees(composite_pi());
  const double pulse_time = (2.0 * pi_deg + 4.0 * half_deg) / 180.0 * kPi / rabi;
  const double tau_free = seq.tau - pulse_time;
  check_budget(tau_free, pi_deg / 180.0 * kPi / rabi, seq.n);

  auto expand = [&](const std::vector<Element>& in) {
    std::vector<Element> out;
    for (const auto& e : in) {
      if (const auto* d = std::get_if<Delay>(&e)) {
        out.push_back(Delay{tau_free / 4.0, DelaySymbol::kNone});
        (void)d;
        continue;
      }
      const auto* p = std::get_if<Pulse>(&e);
      if (!p) throw InvalidArgument("expand_composite: chirps cannot be expanded");
      const std::vector<CompositeEntry>* table = nullptr;
      if (near(p->angle, kPi / 2)) table = &composite_half_pi();
      if (near(p->angle, kPi)) table = &composite_pi();
      if (!table) {
        throw InvalidArgument("expand_composite: only pi/2 and pi pulses can be expanded");
      }
      for (const auto& entry : *table) {
        out.push_back(Pulse{entry.degrees / 180.0 * kPi,
                            wrap_phase(p->phase + (entry.inverted ? kPi : 0.0)),
                            p->rabi, false});
      }
    }
    return out;
  };

  PulseSequence out = seq;
  out.name = seq.name + "-composite";
  out.timing = Timing::kFinite;
  out.composite = true;
  out.prefix = expand(seq.prefix);
  out.cycle = expand(seq.cycle);
  out.suffix = expand(seq.suffix);
  return out;
}

double wrap_phase(double phi) {
  double r = std::remainder(phi, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

PulseSequence apply_phase_error(const PulseSequence& seq, double alpha_phi) {
  if (seq.kind != SequenceKind::kPulsePol) {
    throw InvalidArgument("apply_phase_error: sequence has no known PulsePol block structure");
  }
  if (seq.composite) {
    throw InvalidArgument("apply_phase_error: apply before composite expansion");
  }
  PulseSequence out = seq;
  out.phase_error_applied = true;
  if (alpha_phi == 0.0) return out;
  const std::size_t m = seq.cycle.size();
  for (std::size_t k = 0; k < m; ++k) {
    const auto* cur = std::get_if<Pulse>(&seq.cycle[k]);
    const auto* prev = std::get_if<Pulse>(&seq.cycle[(k + m - 1) % m]);
    if (!cur || !prev || !near(cur->angle, kPi / 2)) continue;
    const double toward = wrap_phase(prev->phase - cur->phase);
    if (std::abs(toward) < 1e-12) continue;
    std::get<Pulse>(out.cycle[k]).phase =
        cur->phase + (toward > 0.0 ? alpha_phi : -alpha_phi);
  }
  return out;
}

}  // namespace pulsepol
