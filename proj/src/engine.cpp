#include "pulsepol/engine.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "pulsepol/error.hpp"
#include "pulsepol/format.hpp"

namespace pulsepol::engine {

using linalg::HermitianExp;

namespace {

// Element propagators for one (system, error model) pair. Generators are
// diagonalised once and reused for every duration.
class Evolver {
 public:
  Evolver(const SpinSystem& sys, const ErrorModel& err, const ChirpOptions& opt)
      : sys_(sys), err_(err), opt_(opt), nuc_(sys.num_nuclei()) {
    err.validate();
  }

  int dim() const { return sys_.dim(); }

  // Propagator over the sub-interval [f0, f1] (fractions of the element).
  CMatrix prop(const Element& e, double f0 = 0.0, double f1 = 1.0) {
    if (const auto* d = std::get_if<Delay>(&e)) {
      return free_exp().at((f1 - f0) * d->duration);
    }
    if (const auto* p = std::get_if<Pulse>(&e)) {
      if (p->ideal) return ideal_rotation(*p);
      return pulse_exp(p->phase, p->rabi).at((f1 - f0) * p->duration());
    }
    const auto& c = std::get<Chirp>(e);
    Chirp part = c;
    const double slope = c.detuning_end - c.detuning_start;
    part.duration = (f1 - f0) * c.duration;
    part.detuning_start = c.detuning_start + f0 * slope;
    part.detuning_end = c.detuning_start + f1 * slope;
    return chirp(part);
  }

 private:
  const SpinSystem& sys_;
  ErrorModel err_;
  ChirpOptions opt_;
  int nuc_;
  std::optional<HermitianExp> free_;
  struct PulseKey {
    double phase;
    double rabi;
  };
  std::vector<std::pair<PulseKey, HermitianExp>> pulses_;

  const HermitianExp& free_exp() {
    if (!free_) free_.emplace(free_hamiltonian(sys_, err_.detuning));
    return *free_;
  }

  double drive(double rabi) const { return rabi * (1.0 - err_.rabi_error_frac); }

  const HermitianExp& pulse_exp(double phase, double rabi) {
    for (const auto& [key, exp] : pulses_) {
      if (key.phase == phase && key.rabi == rabi) return exp;
    }
    const CMatrix h = free_hamiltonian(sys_, err_.detuning) +
                      drive_term(nuc_, drive(rabi), phase);
    pulses_.emplace_back(PulseKey{phase, rabi}, HermitianExp(h));
    return pulses_.back().second;
  }

  CMatrix ideal_rotation(const Pulse& p) const {
    const double theta = p.angle * (1.0 - err_.rabi_error_frac);
    const CMatrix axis = std::cos(p.phase) * ops::sx() + std::sin(p.phase) * ops::sy();
    const CMatrix r = linalg::propagator(axis, theta);
    const Eigen::Index bath = Eigen::Index{1} << nuc_;
    return linalg::kron(r, CMatrix::Identity(bath, bath));
  }

  CMatrix chirp_steps(const Chirp& c, int steps, const CMatrix& base,
                      const CMatrix& sz, const CMatrix& comm) const {
    const double h = c.duration / steps;
    const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
    const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
    const double rate = c.duration > 0.0 ? (c.detuning_end - c.detuning_start) / c.duration : 0.0;
    const double delta_gap = rate * (c2 - c1) * h;
    const CMatrix comm_term =
        linalg::Complex(0.0, -std::sqrt(3.0) * h / 12.0 * delta_gap) * comm;
    CMatrix u = CMatrix::Identity(base.rows(), base.cols());
    for (int j = 0; j < steps; ++j) {
      const double d1 = c.detuning_start + rate * (j + c1) * h;
      const double d2 = c.detuning_start + rate * (j + c2) * h;
      const CMatrix heff = base + 0.5 * (d1 + d2) * sz + comm_term;
      u = linalg::propagator(heff, h) * u;
    }
    return u;
  }

  CMatrix chirp(const Chirp& c) const {
    const int n = dim();
    if (!(c.duration > 0.0)) return CMatrix::Identity(n, n);
    const CMatrix sz = ops::embed(ops::sz(), 0, nuc_);
    const CMatrix base = free_hamiltonian(sys_, err_.detuning) +
                         drive_term(nuc_, drive(c.rabi), c.phase);
    // [H(t2), H(t1)] = (δ2 - δ1)[Sz, H_base] for a linear detuning ramp.
    const CMatrix comm = sz * base - base * sz;
    int steps = std::max(1, opt_.min_steps);
    CMatrix prev = chirp_steps(c, steps, base, sz, comm);
    while (true) {
      if (steps * 2 > opt_.max_steps) {
        throw NumericalError("chirp integration did not converge within " +
                             std::to_string(opt_.max_steps) + " steps");
      }
      steps *= 2;
      CMatrix next = chirp_steps(c, steps, base, sz, comm);
      const double change = linalg::max_abs_diff(next, prev);
      prev = std::move(next);
      if (change < opt_.tolerance) break;
    }
    return prev;
  }
};

CMatrix power(CMatrix base, std::size_t exp) {
  CMatrix out = CMatrix::Identity(base.rows(), base.cols());
  while (exp > 0) {
    if (exp & 1U) out = base * out;
    exp >>= 1U;
    if (exp) base = base * base;
  }
  return out;
}

CMatrix product(Evolver& ev, const std::vector<Element>& elems) {
  CMatrix u = CMatrix::Identity(ev.dim(), ev.dim());
  for (const auto& e : elems) u = ev.prop(e) * u;
  return u;
}

double diag_expectation(const CMatrix& rho, int site, int num_nuclei) {
  const int shift = num_nuclei - site;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    const double sign = ((i >> shift) & 1) ? -0.5 : 0.5;
    acc += sign * rho(i, i).real();
  }
  return acc;
}

int nuclei_of(const DensityState& s) { return static_cast<int>(s.dims.size()) - 1; }

void check_state_dims(const SpinSystem& sys, const DensityState& s) {
  if (s.rho.rows() != sys.dim() || s.rho.cols() != sys.dim()) {
    throw DimensionError("initial state dimension " + std::to_string(s.rho.rows()) +
                         " does not match system dimension " + std::to_string(sys.dim()));
  }
}

void record(PolarisationTrace& tr, const DensityState& s, double t) {
  tr.times.push_back(t);
  tr.electron_sz.push_back(s.electron_sz());
  std::vector<double> iz(static_cast<std::size_t>(nuclei_of(s)));
  for (int k = 0; k < nuclei_of(s); ++k) iz[k] = s.nuclear_iz(k);
  tr.nuclear_iz.push_back(std::move(iz));
}

}  // namespace

DensityState DensityState::initial(const SpinSystem& sys, NuclearInit init) {
  const Eigen::Index bath = Eigen::Index{1} << sys.num_nuclei();
  CMatrix b = CMatrix::Zero(bath, bath);
  switch (init) {
    case NuclearInit::kMixed:
      b = CMatrix::Identity(bath, bath) / static_cast<double>(bath);
      break;
    case NuclearInit::kUp:
      b(0, 0) = 1.0;
      break;
    case NuclearInit::kDown:
      b(bath - 1, bath - 1) = 1.0;
      break;
  }
  return with_bath(b);
}

DensityState DensityState::with_bath(const CMatrix& bath) {
  if (bath.rows() != bath.cols() || bath.rows() < 1 ||
      (bath.rows() & (bath.rows() - 1)) != 0) {
    throw DimensionError("bath state must be square with a power-of-two dimension");
  }
  CMatrix e = CMatrix::Zero(2, 2);
  e(0, 0) = 1.0;
  DensityState s;
  s.rho = linalg::kron(e, bath);
  int n = 0;
  while ((Eigen::Index{1} << n) < bath.rows()) ++n;
  s.dims.assign(static_cast<std::size_t>(n) + 1, 2);
  return s;
}

double DensityState::trace() const { return rho.trace().real(); }

void DensityState::validate(double tol) const {
  if (linalg::hermiticity_defect(rho) > tol) {
    throw NumericalError("density matrix is not Hermitian");
  }
  if (std::abs(trace() - 1.0) > tol) {
    throw NumericalError("density matrix trace " + format_double(trace()) + " != 1");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()),
                                            Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw NumericalError("density matrix has a negative eigenvalue");
  }
}

void DensityState::apply(const CMatrix& u) {
  if (u.rows() != rho.rows()) throw DimensionError("propagator dimension mismatch");
  rho = u * rho * u.adjoint();
}

double DensityState::electron_sz() const { return diag_expectation(rho, 0, nuclei_of(*this)); }

double DensityState::nuclear_iz(int k) const {
  if (k < 0 || k >= nuclei_of(*this)) throw InvalidArgument("nuclear_iz: index out of range");
  return diag_expectation(rho, k + 1, nuclei_of(*this));
}

double DensityState::total_iz() const {
  double acc = 0.0;
  for (int k = 0; k < nuclei_of(*this); ++k) acc += nuclear_iz(k);
  return acc;
}

CMatrix element_propagator(const SpinSystem& sys, const Element& e,
                           const ErrorModel& err, const ChirpOptions& opt) {
  Evolver ev(sys, err, opt);
  return ev.prop(e);
}

CMatrix elements_propagator(const SpinSystem& sys, const std::vector<Element>& elems,
                            const ErrorModel& err, const ChirpOptions& opt) {
  Evolver ev(sys, err, opt);
  return product(ev, elems);
}

CMatrix sequence_propagator(const SpinSystem& sys, const PulseSequence& seq,
                            const ErrorModel& err, const ChirpOptions& opt) {
  Evolver ev(sys, err, opt);
  const CMatrix pre = product(ev, seq.prefix);
  const CMatrix cyc = power(product(ev, seq.cycle), seq.repetitions);
  const CMatrix suf = product(ev, seq.suffix);
  return suf * cyc * pre;
}

double PolarisationTrace::transfer(std::size_t k) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < nuclear_iz[k].size(); ++j) {
    acc += nuclear_iz[k][j] - nuclear_iz[0][j];
  }
  return pump_sign * 2.0 * acc;
}

double PolarisationTrace::max_transfer() const {
  double best = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) best = std::max(best, transfer(k));
  return best;
}

PolarisationTrace polarisation_trace(const SpinSystem& sys, const PulseSequence& seq,
                                     const ErrorModel& err, const DensityState& init,
                                     const TraceOptions& opt) {
  check_state_dims(sys, init);
  if (opt.sample_every == 0) throw InvalidArgument("sample_every must be >= 1");
  Evolver ev(sys, err, {});
  PolarisationTrace tr;
  tr.pump_sign = seq.pump_sign;
  DensityState s = init;
  record(tr, s, 0.0);

  if (opt.max_step > 0.0) {
    double t = 0.0;
    for (const auto& e : seq.elements()) {
      const double dur = element_duration(e);
      const auto parts = static_cast<int>(std::max(1.0, std::ceil(dur / opt.max_step - 1e-9)));
      if (dur == 0.0) {
        s.apply(ev.prop(e));
        continue;
      }
      // Equal sub-steps of a delay or pulse share one propagator.
      const bool uniform = !std::holds_alternative<Chirp>(e);
      const CMatrix step = uniform ? ev.prop(e, 0.0, 1.0 / parts) : CMatrix();
      for (int k = 0; k < parts; ++k) {
        s.apply(uniform ? step
                        : ev.prop(e, static_cast<double>(k) / parts,
                                  static_cast<double>(k + 1) / parts));
        record(tr, s, t + dur * (k + 1) / parts);
      }
      t += dur;
    }
    return tr;
  }

  s.apply(product(ev, seq.prefix));
  const double t0 = seq.prefix_duration();
  const double period = seq.cycle_duration();
  const CMatrix uc = product(ev, seq.cycle);
  for (std::size_t k = 1; k <= seq.repetitions; ++k) {
    s.apply(uc);
    if (k % opt.sample_every == 0 || k == seq.repetitions) {
      record(tr, s, t0 + period * static_cast<double>(k));
    }
  }
  return tr;
}

double raw_transfer(const SpinSystem& sys, const PulseSequence& seq,
                    const ErrorModel& err, double t_final) {
  DensityState s = DensityState::initial(sys);
  const double iz0 = s.total_iz();
  if (!(t_final > 0.0)) return 0.0;
  Evolver ev(sys, err, {});
  const double eps = 1e-15 + 1e-12 * t_final;
  double left = t_final;

  // Evolves through elements while time remains; returns false once done.
  auto run = [&](const std::vector<Element>& elems) {
    for (const auto& e : elems) {
      const double dur = element_duration(e);
      if (dur <= left + eps) {
        if (dur == 0.0 && left <= eps) return false;
        s.apply(ev.prop(e));
        left -= dur;
      } else {
        s.apply(ev.prop(e, 0.0, left / dur));
        left = 0.0;
        return false;
      }
    }
    return true;
  };

  if (run(seq.prefix)) {
    const double period = seq.cycle_duration();
    std::size_t whole = seq.repetitions;
    if (period > 0.0) {
      const auto fit = static_cast<std::size_t>(std::floor((left + eps) / period));
      whole = std::min(whole, fit);
    }
    if (whole > 0) {
      s.apply(power(product(ev, seq.cycle), whole));
      left -= period * static_cast<double>(whole);
    }
    if (whole < seq.repetitions) {
      if (left > eps) run(seq.cycle);
    } else {
      run(seq.suffix);
    }
  }
  return 2.0 * (s.total_iz() - iz0);
}

double transfer_efficiency(const SpinSystem& sys, const PulseSequence& seq,
                           const ErrorModel& err, double t_final) {
  return seq.pump_sign * raw_transfer(sys, seq, err, t_final);
}

DensityState reset_electron(const DensityState& s, double fidelity) {
  if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
    throw InvalidArgument("reset fidelity must lie in [0, 1]");
  }
  const CMatrix bath = linalg::partial_trace_electron(s.rho, s.dims);
  CMatrix e = CMatrix::Zero(2, 2);
  e(0, 0) = fidelity;
  e(1, 1) = 1.0 - fidelity;
  DensityState out;
  out.rho = linalg::kron(e, bath);
  out.dims = s.dims;
  return out;
}

BuildupCurve propi_run(const SpinSystem& sys, const PulseSequence& seq,
                       const ErrorModel& err, int cycles, const DensityState& init,
                       const PropiOptions& opt) {
  if (cycles < 1) throw InvalidArgument("propi_run: cycles must be >= 1");
  check_state_dims(sys, init);
  const CMatrix u = sequence_propagator(sys, seq, err);
  BuildupCurve curve;
  DensityState s = init;
  auto push = [&] {
    const double iz = s.total_iz();
    curve.total_iz.push_back(iz);
    curve.polarisation.push_back(seq.pump_sign * iz);
  };
  push();
  for (int c = 0; c < cycles; ++c) {
    s = reset_electron(s, opt.reset_fidelity);
    s.apply(u);
    push();
  }
  return curve;
}

void write_trace_csv(std::ostream& out, const PolarisationTrace& trace) {
  out << "time_s,observable,value\n";
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const std::string t = format_double(trace.times[k]);
    out << t << ",electron_sz," << format_double(trace.electron_sz[k]) << '\n';
    for (std::size_t j = 0; j < trace.nuclear_iz[k].size(); ++j) {
      out << t << ",iz_" << j << ',' << format_double(trace.nuclear_iz[k][j]) << '\n';
    }
    out << t << ",transfer," << format_double(trace.transfer(k)) << '\n';
  }
}

}  // namespace pulsepol::engine
