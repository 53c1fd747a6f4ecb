#include <cmath>
#include <set>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "pulsepol/error.hpp"
#include "pulsepol/lattice.hpp"
#include "pulsepol/units.hpp"

using namespace pulsepol;
using namespace pulsepol::lattice;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double coupling_scale(double r) {
  return -kMu0Over4Pi * kGammaElectron * kGammaCarbon * kHbar / (r * r * r);
}

Vec3 scaled(const Vec3& v, double s) { return {v[0] * s, v[1] * s, v[2] * s}; }

// Full dipolar tensor d(1 - 3 r̂r̂ᵀ) projected on the field axis.
Hyperfine tensor_oracle(const Vec3& r, const Vec3& b) {
  const double len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  const double d = coupling_scale(len);
  double t[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = d * ((i == j ? 1.0 : 0.0) - 3.0 * r[i] * r[j] / (len * len));
  double tb[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tb[i] += t[i][j] * b[j];
  const double az = tb[0] * b[0] + tb[1] * b[1] + tb[2] * b[2];
  double perp2 = 0.0;
  for (int i = 0; i < 3; ++i) perp2 += std::pow(tb[i] - az * b[i], 2);
  return {std::sqrt(perp2), az};
}

}  // namespace

TEST_CASE("diamond lattice sites", "[lattice]") {
  CHECK(is_diamond_site(0, 0, 0));
  CHECK(is_diamond_site(1, 1, 1));
  CHECK(is_diamond_site(0, 2, 2));
  CHECK(is_diamond_site(3, 3, 1));
  CHECK_FALSE(is_diamond_site(1, 1, 0));
  CHECK_FALSE(is_diamond_site(2, 0, 0));
  CHECK_FALSE(is_diamond_site(1, 1, 3));
  // Four nearest neighbours at sqrt(3)/4 a0, twelve next-nearest at a0/sqrt(2).
  int nn = 0, nnn = 0;
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      for (int z = -2; z <= 2; ++z) {
        if (!is_diamond_site(x, y, z)) continue;
        const int r2 = x * x + y * y + z * z;
        nn += r2 == 3;
        nnn += r2 == 8;
      }
  CHECK(nn == 4);
  CHECK(nnn == 12);
  CHECK(is_diamond_site(-1, -1, -1) == false);
  CHECK(is_diamond_site(-1, -1, 1));
}

TEST_CASE("realizations are deterministic", "[lattice]") {
  const auto a = sample_realization(42, 5);
  const auto b = sample_realization(42, 5);
  REQUIRE(a.selected.size() == 5);
  CHECK(a.sites == b.sites);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(a.hyperfine[k].a_x == b.hyperfine[k].a_x);
    CHECK(a.hyperfine[k].a_z == b.hyperfine[k].a_z);
  }
  const auto c = sample_realization(43, 5);
  CHECK(a.sites != c.sites);
}

TEST_CASE("selection contract", "[lattice]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = sample_realization(seed, 5);
    REQUIRE(r.selected.size() == 5);
    REQUIRE(r.hyperfine.size() == 5);
    double prev = 0.0;
    for (auto idx : r.selected) {
      const auto& p = r.positions[idx];
      const double d = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      CHECK(d >= prev);
      CHECK(d >= kMinDistance);
      prev = d;
    }
    for (const auto& hf : r.hyperfine) CHECK(hf.a_x >= 0.0);
  }
}

TEST_CASE("more spins extend the same draw", "[lattice]") {
  const auto few = sample_realization(9, 3);
  const auto many = sample_realization(9, 8);
  for (int k = 0; k < 3; ++k) CHECK(few.sites[k] == many.sites[k]);
}

TEST_CASE("occupancy follows the natural abundance", "[lattice]") {
  long sites = 0, occupied = 0;
  for (int x = -24; x <= 24; ++x)
    for (int y = -24; y <= 24; ++y)
      for (int z = -24; z <= 24; ++z) {
        if (!is_diamond_site(x, y, z)) continue;
        ++sites;
        occupied += site_occupied(2024, x, y, z);
      }
  REQUIRE(sites >= 10000);
  const double p = kOccupancy;
  const double frac = static_cast<double>(occupied) / sites;
  const double sigma = std::sqrt(p * (1 - p) / sites);
  CHECK(std::abs(frac - p) < 3.0 * sigma);
}

TEST_CASE("dipolar hyperfine", "[lattice]") {
  const Vec3 b = default_field_axis();
  const double r = 1e-9;
  const double d = coupling_scale(r);
  SECTION("along the field axis") {
    const auto hf = dipolar_hyperfine(scaled(b, r), b);
    CHECK_THAT(hf.a_x, WithinAbs(0.0, 1e-9 * d));
    CHECK_THAT(hf.a_z, WithinRel(-2.0 * d, 1e-12));
  }
  SECTION("magic angle") {
    const Vec3 z = {0, 0, 1};
    const double th = std::acos(1.0 / std::sqrt(3.0));
    const auto hf = dipolar_hyperfine({r * std::sin(th), 0.0, r * std::cos(th)}, z);
    CHECK_THAT(hf.a_z, WithinAbs(0.0, 1e-9 * d));
    CHECK_THAT(hf.a_x, WithinRel(3.0 * d * std::sqrt(2.0) / 3.0, 1e-12));
  }
  SECTION("0.5 nm at 45 degrees against the full tensor") {
    const Vec3 z = {0, 0, 1};
    const double rr = 0.5e-9;
    const Vec3 pos = {rr * std::sqrt(0.5), 0.0, rr * std::sqrt(0.5)};
    const auto got = dipolar_hyperfine(pos, z);
    const auto ref = tensor_oracle(pos, z);
    CHECK_THAT(got.a_x, WithinRel(ref.a_x, 1e-12));
    CHECK_THAT(got.a_z, WithinAbs(ref.a_z, 1e-9 * std::abs(got.a_x)));
    // Also against a tilted field axis.
    const Vec3 pos2 = {0.3e-9, -0.2e-9, 0.35e-9};
    const auto got2 = dipolar_hyperfine(pos2, b);
    const auto ref2 = tensor_oracle(pos2, b);
    CHECK_THAT(got2.a_x, WithinRel(ref2.a_x, 1e-10));
    CHECK_THAT(got2.a_z, WithinRel(ref2.a_z, 1e-10));
  }
  SECTION("inverse cube scaling") {
    const Vec3 p = {0.4e-9, 0.1e-9, -0.3e-9};
    const auto a = dipolar_hyperfine(p, b);
    const auto c = dipolar_hyperfine(scaled(p, 2.0), b);
    CHECK_THAT(c.a_x * 8.0, WithinRel(a.a_x, 1e-13));
    CHECK_THAT(c.a_z * 8.0, WithinRel(a.a_z, 1e-13));
  }
  SECTION("coupling scale at 1 nm") {
    CHECK_THAT(units::to_mhz(d) * 1e3, WithinRel(19.9, 0.01));
  }
  SECTION("origin is rejected") {
    CHECK_THROWS_AS(dipolar_hyperfine({0, 0, 0}, b), InvalidArgument);
  }
}

TEST_CASE("realization CSV", "[lattice]") {
  std::ostringstream out;
  write_realization_csv(out, {sample_realization(1, 2)});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "seed,site,x,y,z,A_x,A_z");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.rfind("1,", 0) == 0);
  }
  CHECK(rows == 2);
}
