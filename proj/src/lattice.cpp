#include "pulsepol/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pulsepol/error.hpp"
#include "pulsepol/format.hpp"
#include "pulsepol/seeding.hpp"

namespace pulsepol::lattice {

Vec3 default_field_axis() {
  const double c = 1.0 / std::sqrt(3.0);
  return {c, c, c};
}

bool is_diamond_site(int x, int y, int z) {
  auto mod4 = [](int v) { return ((v % 4) + 4) % 4; };
  const bool all_even = (x % 2 == 0) && (y % 2 == 0) && (z % 2 == 0);
  const bool all_odd = (x % 2 != 0) && (y % 2 != 0) && (z % 2 != 0);
  if (all_even) return mod4(x + y + z) == 0;
  if (all_odd) return mod4(x + y + z) == 3;
  return false;
}

bool site_occupied(std::uint64_t seed, int x, int y, int z, double occupancy) {
  std::uint64_t h = seeding::splitmix64(seed);
  h = seeding::mix(h, static_cast<std::uint32_t>(x));
  h = seeding::mix(h, static_cast<std::uint32_t>(y));
  h = seeding::mix(h, static_cast<std::uint32_t>(z));
  return seeding::to_unit(h) < occupancy;
}

Hyperfine dipolar_hyperfine(const Vec3& r, const Vec3& field_axis) {
  const double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  if (!(len > 0.0)) throw InvalidArgument("dipolar_hyperfine: |r| must be > 0");
  const double blen = std::sqrt(field_axis[0] * field_axis[0] +
                                field_axis[1] * field_axis[1] +
                                field_axis[2] * field_axis[2]);
  if (!(blen > 0.0)) throw InvalidArgument("dipolar_hyperfine: zero field axis");
  const double c =
      (r[0] * field_axis[0] + r[1] * field_axis[1] + r[2] * field_axis[2]) /
      (len * blen);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double d =
      -kMu0Over4Pi * kGammaElectron * kGammaCarbon * kHbar / (len * len * len);
  return {std::abs(3.0 * d * s * c), d * (1.0 - 3.0 * c * c)};
}

LatticeRealization sample_realization(std::uint64_t seed, int n_select,
                                      const Vec3& field_axis) {
  if (n_select < 1) throw InvalidArgument("sample_realization: n_select must be >= 1");
  const double quarter = kLatticeConstant / 4.0;
  const double min_q2 = std::pow(kMinDistance / quarter, 2);

  struct Site {
    std::array<int, 3> q;
    long r2;
  };
  std::vector<Site> found;
  for (int radius = 8;; radius *= 2) {
    found.clear();
    const long r2max = static_cast<long>(radius) * radius;
    for (int x = -radius; x <= radius; ++x) {
      for (int y = -radius; y <= radius; ++y) {
        for (int z = -radius; z <= radius; ++z) {
          const long r2 = long{x} * x + long{y} * y + long{z} * z;
          if (r2 > r2max || r2 == 0 || static_cast<double>(r2) < min_q2) continue;
          if (!is_diamond_site(x, y, z)) continue;
          if (site_occupied(seed, x, y, z)) found.push_back({{x, y, z}, r2});
        }
      }
    }
    if (static_cast<int>(found.size()) >= n_select) break;
    if (radius > 1024) throw NumericalError("sample_realization: no sites found");
  }
  std::sort(found.begin(), found.end(), [](const Site& a, const Site& b) {
    if (a.r2 != b.r2) return a.r2 < b.r2;
    return a.q < b.q;
  });

  LatticeRealization out;
  out.seed = seed;
  for (const auto& s : found) {
    out.sites.push_back(s.q);
    out.positions.push_back({s.q[0] * quarter, s.q[1] * quarter, s.q[2] * quarter});
  }
  for (int k = 0; k < n_select; ++k) {
    out.selected.push_back(static_cast<std::size_t>(k));
    out.hyperfine.push_back(dipolar_hyperfine(out.positions[k], field_axis));
  }
  return out;
}

SpinSystem to_spin_system(const LatticeRealization& real, double larmor,
                          double rabi, double detuning) {
  SpinSystem sys;
  sys.rabi = rabi;
  sys.detuning = detuning;
  for (const auto& hf : real.hyperfine) {
    sys.nuclei.push_back({larmor, hf.a_x, hf.a_z});
  }
  return sys;
}

void write_realization_csv(std::ostream& out,
                           const std::vector<LatticeRealization>& reals) {
  out << "seed,site,x,y,z,A_x,A_z\n";
  for (const auto& r : reals) {
    for (std::size_t k = 0; k < r.selected.size(); ++k) {
      const auto& p = r.positions[r.selected[k]];
      out << r.seed << ',' << k << ',' << format_double(p[0]) << ','
          << format_double(p[1]) << ',' << format_double(p[2]) << ','
          << format_double(r.hyperfine[k].a_x) << ','
          << format_double(r.hyperfine[k].a_z) << '\n';
    }
  }
}

}  // namespace pulsepol::lattice
