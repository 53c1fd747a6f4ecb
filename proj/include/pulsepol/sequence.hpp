#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pulsepol {

namespace phase {
inline constexpr double kX = 0.0;
inline constexpr double kY = 1.5707963267948966;
inline constexpr double kMinusX = 3.141592653589793;
inline constexpr double kMinusY = -1.5707963267948966;
}  // namespace phase

/// Rotation of the electron about an axis in the x-y plane. With `ideal`
/// set the rotation is instantaneous (δ-pulse) and no free evolution
/// happens during it.
struct Pulse {
  double angle = 0.0;  // rad
  double phase = 0.0;  // rad
  double rabi = 0.0;   // nominal Ω₀, rad/s
  bool ideal = false;

  double duration() const { return ideal ? 0.0 : angle / rabi; }
};

enum class DelaySymbol { kNone, kTauQuarter, kTauHalf, kTau };

struct Delay {
  double duration = 0.0;  // s
  DelaySymbol symbol = DelaySymbol::kNone;
};

/// Drive with a detuning that ramps linearly from detuning_start to
/// detuning_end over the element.
struct Chirp {
  double duration = 0.0;         // s
  double rabi = 0.0;             // rad/s
  double detuning_start = 0.0;   // rad/s
  double detuning_end = 0.0;     // rad/s
  double phase = 0.0;            // rad
};

using Element = std::variant<Pulse, Delay, Chirp>;

double element_duration(const Element& e);

enum class SequenceKind { kCustom, kPulsePol, kPolXY, kNovel, kIse };
enum class PulsePolVariant { kStandard, kYX, kCombined };
enum class Timing { kIdeal, kFinite };

/// prefix, then `cycle` repeated `repetitions` times, then suffix.
struct PulseSequence {
  std::string name;
  SequenceKind kind = SequenceKind::kCustom;
  PulsePolVariant variant = PulsePolVariant::kStandard;
  Timing timing = Timing::kFinite;
  int n = 0;               // resonance order
  double larmor = 0.0;     // rad/s
  double rabi = 0.0;       // nominal Ω₀, rad/s
  double tau = 0.0;        // pulse spacing τ including any resonance shift, s
  double resonance_shift = 0.0;
  int pump_sign = 1;       // sign of the nuclear polarisation this sequence builds
  bool composite = false;
  bool phase_error_applied = false;

  std::vector<Element> prefix;
  std::vector<Element> cycle;
  std::vector<Element> suffix;
  std::size_t repetitions = 1;

  std::size_t cycle_len() const { return cycle.size(); }
  double cycle_duration() const;
  double prefix_duration() const;
  double duration() const;
  /// Fully unrolled element list.
  std::vector<Element> elements() const;
};

struct PulsePolParams {
  double larmor = 0.0;  // ω_I, rad/s
  double rabi = 0.0;    // Ω₀, rad/s
  int n = 3;
  std::size_t blocks = 1;  // number of repeated cycles
  Timing timing = Timing::kFinite;
  PulsePolVariant variant = PulsePolVariant::kStandard;
  double resonance_shift = 0.0;  // relative lengthening of τ
};

/// Largest single-pulse share of the free evolution per bracket.
inline constexpr double kPulseBudget = 0.2;

/// PulsePol family. A cycle is two brackets (one block, duration 2τ) for
/// the standard and yx variants and four brackets for the combined one.
PulseSequence build_pulsepol(const PulsePolParams& p);

/// PolXY: (π/2)_Y [ ... ]^N (π/2)_-Y with τ = nπ/ω_I. With finite timing
/// pulse centres stay on the ideal grid and the adjacent delays shrink.
PulseSequence build_polxy(double larmor, double rabi, int n,
                          std::size_t reps, Timing timing = Timing::kFinite);

/// (π/2)_Y followed by a phase-X spin lock of the given length.
/// `pulse_rabi` sets the preparation pulse amplitude (defaults to lock_rabi).
PulseSequence build_novel(double larmor, double lock_rabi, double lock_duration,
                          std::optional<double> pulse_rabi = std::nullopt);

/// (π/2)_Y followed by a chirp from +range/2 to -range/2 with duration
/// range * inverse_rate.
PulseSequence build_ise(double center_rabi, double sweep_range,
                        double inverse_rate, double lock_phase = phase::kX,
                        std::optional<double> pulse_rabi = std::nullopt);

/// Composite replacements (degrees, overbar = phase + 180°).
struct CompositeEntry {
  double degrees;
  bool inverted;
};
const std::vector<CompositeEntry>& composite_half_pi();
const std::vector<CompositeEntry>& composite_pi();
double composite_total_degrees(const std::vector<CompositeEntry>& entries);

/// Replaces every π/2 and π pulse by its composite form and re-derives the
/// PulsePol delays for the longer pulses.
PulseSequence expand_composite(const PulseSequence& seq);

/// Phase error on chained π/2 pulses of a PulsePol-family sequence: a π/2
/// pulse that directly follows another pulse is pulled by α_φ toward the
/// phase of that pulse (Y becomes Y cos α - X sin α, -X becomes
/// -X cos α + Y sin α). The cycle is treated as periodic.
PulseSequence apply_phase_error(const PulseSequence& seq, double alpha_phi);

/// Wraps an angle to (-π, π].
double wrap_phase(double phi);

}  // namespace pulsepol
