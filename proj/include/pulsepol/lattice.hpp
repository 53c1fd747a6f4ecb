#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pulsepol/spin_system.hpp"

namespace pulsepol::lattice {

using Vec3 = std::array<double, 3>;

inline constexpr double kLatticeConstant = 0.357e-9;  // m
inline constexpr double kOccupancy = 0.011;
inline constexpr double kMinDistance = 0.25e-9;       // m
inline constexpr double kGammaElectron = -2.0 * 3.14159265358979323846 * 28.024e9;  // rad/s/T
inline constexpr double kGammaCarbon = 2.0 * 3.14159265358979323846 * 10.705e6;     // rad/s/T
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kMu0Over4Pi = 1e-7;

struct Hyperfine {
  double a_x = 0.0;  // rad/s
  double a_z = 0.0;  // rad/s
};

struct LatticeRealization {
  std::uint64_t seed = 0;
  std::vector<Vec3> positions;  // occupied sites found, nearest first (m)
  std::vector<std::size_t> selected;  // indices into positions
  std::vector<Hyperfine> hyperfine;   // one per selected site
  std::vector<std::array<int, 3>> sites;  // quarter-cell integer coordinates
};

/// Unit vector along [111], the default field direction.
Vec3 default_field_axis();

/// True for quarter-cell coordinates belonging to the diamond lattice.
bool is_diamond_site(int x, int y, int z);

/// Counter-based occupancy draw; depends only on (seed, site).
bool site_occupied(std::uint64_t seed, int x, int y, int z,
                   double occupancy = kOccupancy);

/// Draws occupied ¹³C sites around an NV at the origin and returns the
/// n_select closest ones with their couplings. Deterministic in `seed`;
/// the search radius grows until enough sites are found.
LatticeRealization sample_realization(std::uint64_t seed, int n_select,
                                      const Vec3& field_axis = default_field_axis());

/// Secular point-dipole couplings for a nucleus at r (m). A_x ≥ 0.
Hyperfine dipolar_hyperfine(const Vec3& r, const Vec3& field_axis);

/// Builds a system from a realization with a common Larmor frequency.
SpinSystem to_spin_system(const LatticeRealization& real, double larmor,
                          double rabi, double detuning = 0.0);

/// Header plus one row per selected site:
/// seed,site,x,y,z,A_x,A_z (metres and rad/s)
void write_realization_csv(std::ostream& out,
                           const std::vector<LatticeRealization>& reals);

}  // namespace pulsepol::lattice
