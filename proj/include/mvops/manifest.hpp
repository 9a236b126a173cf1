// Fixed parameter grids for the acceptance run. Changing any entry means
// bumping kManifestVersion so reports stay comparable.
#pragma once

#include "mvops/families.hpp"

#include <string>
#include <vector>

namespace mvops::manifest {

inline constexpr const char* kManifestVersion = "mvops-manifest/1";

/// Highest degree used by the catalog checks.
inline constexpr int kDegree = 6;

inline const std::vector<Real>& chebyshev_rhos() {
  static const std::vector<Real> r{-2, -1, -0.5L, 0.5L, 1, 2};
  return r;
}
inline const std::vector<int>& chebyshev_kinds() {
  static const std::vector<int> k{1, 2, 3, 4};
  return k;
}

struct ChebyshevCase {
  int kind;
  Real rho;
  bool expected_orthogonal;  // a false entry is an expected negative, not a failure
};

inline std::vector<ChebyshevCase> chebyshev_cases() {
  std::vector<ChebyshevCase> out;
  for (int kind : chebyshev_kinds())
    for (Real rho : chebyshev_rhos()) out.push_back({kind, rho, ChebyshevKoornwinder::rule(kind, rho)});
  return out;
}

inline const std::vector<Real>& disk_mus() {
  static const std::vector<Real> m{0, 1.5L};
  return m;
}

inline std::vector<KrallParams> krall_cases() {
  KrallParams lag;
  lag.kind = KrallKind::Laguerre;
  lag.alpha = 0.5L;
  lag.a1 = 2;
  KrallParams jac;
  jac.kind = KrallKind::Jacobi;
  jac.alpha = 0.5L;
  jac.beta = 0;
  jac.a1 = 1;
  return {lag, jac};
}

/// Base parameters for the quasi-definiteness gate scan; a1 is replaced by
/// each root of the gate at degree n.
inline std::vector<KrallParams> krall_gate_bases() {
  std::vector<KrallParams> out = krall_cases();
  KrallParams lag0;
  lag0.kind = KrallKind::Laguerre;
  lag0.alpha = 0;
  lag0.a1 = 2;
  KrallParams jac0;
  jac0.kind = KrallKind::Jacobi;
  jac0.alpha = 0;
  jac0.beta = 0.5L;
  jac0.a1 = 1;
  out.push_back(lag0);
  out.push_back(jac0);
  return out;
}
inline constexpr int kGateMinDegree = 3;  // n = 2 puts the root at the excluded a1 = 0
inline constexpr int kGateMaxDegree = 6;
inline constexpr Real kGateScanLo = -3, kGateScanHi = 3;

struct AdjacentCase {
  std::string family;  // simplex | cube | multi-laguerre
  std::vector<Real> p1, p2;
  int direction;
  bool shift_b;
  int N;

  std::string label() const {
    std::string s = family + " j=" + std::to_string(direction);
    if (family == "cube") s += shift_b ? " b+e_j" : " a+e_j";
    if (family == "simplex") s += " d=" + std::to_string(p1.size() - 1);
    return s;
  }
  AdjacentFamily run(const Tolerances& tol = {}) const {
    if (family == "simplex") return simplex_adjacent(p1, direction, N, tol);
    if (family == "cube") return cube_adjacent(p1, p2, direction, shift_b, N, tol);
    return laguerre_adjacent(p1, direction, N, tol);
  }
};

inline std::vector<AdjacentCase> adjacent_cases() {
  std::vector<AdjacentCase> out;
  for (int j = 1; j <= 2; ++j) out.push_back({"simplex", {0.5L, 0.5L, 0.5L}, {}, j, false, 5});
  for (int j = 1; j <= 3; ++j) out.push_back({"simplex", {0.5L, 0.5L, 0.5L, 0.5L}, {}, j, false, 4});
  for (int j = 1; j <= 2; ++j)
    for (bool b : {false, true}) out.push_back({"cube", {0, 0}, {0, 0}, j, b, 5});
  for (int j = 1; j <= 2; ++j) out.push_back({"multi-laguerre", {0, 1}, {}, j, false, 5});
  return out;
}

inline constexpr int kCounterexampleMax = 8;
inline constexpr int kFavardDegree = 5;
inline constexpr int kMomentMaxDegree = 8;

}  // namespace mvops::manifest
