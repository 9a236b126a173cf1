// Family strings ("disk:mu=1.5", "simplex:k=0.5,0.5,0.5") and the built-in
// moment functionals they name.
#pragma once

#include "mvops/matrixkit.hpp"
#include "mvops/moments.hpp"

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvops {

/// A family name with keyed parameter lists. Values without a key continue
/// the list of the previous key, so "k=0.5,0.5,0.5" gives k = {0.5,0.5,0.5}.
struct FamilySpec {
  std::string name;
  std::map<std::string, std::vector<Real>> params;

  bool has(const std::string& key) const { return params.count(key) != 0; }
  Real scalar(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw ParseError(name + ": missing parameter '" + key + "'");
    if (it->second.size() != 1) throw ParseError(name + ": parameter '" + key + "' must be a single number");
    return it->second.front();
  }
  Real scalar(const std::string& key, Real fallback) const { return has(key) ? scalar(key) : fallback; }
  const std::vector<Real>& list(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw ParseError(name + ": missing parameter '" + key + "'");
    return it->second;
  }
  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const Real v = scalar(key);
    if (v != std::floor(v)) throw ParseError(name + ": parameter '" + key + "' must be an integer");
    return static_cast<int>(v);
  }
  std::string str() const {
    std::string s = name;
    char sep = ':';
    for (const auto& [k, vs] : params) {
      s += sep;
      s += k + "=";
      for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + format_real(vs[i]);
      sep = ',';
    }
    return s;
  }
};

inline FamilySpec parse_family_spec(const std::string& text) {
  FamilySpec spec;
  const auto colon = text.find(':');
  spec.name = text.substr(0, colon);
  if (spec.name.empty()) throw ParseError("empty family name");
  if (colon == std::string::npos) return spec;
  std::stringstream ss(text.substr(colon + 1));
  std::string tok, key;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw ParseError("empty parameter in '" + text + "'");
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      key = tok.substr(0, eq);
      if (key.empty()) throw ParseError("parameter without a name in '" + text + "'");
      if (spec.params.count(key)) throw ParseError("parameter '" + key + "' given twice");
      spec.params[key].push_back(parse_real(tok.substr(eq + 1)));
    } else {
      if (key.empty()) throw ParseError("value '" + tok + "' has no parameter name");
      spec.params[key].push_back(parse_real(tok));
    }
  }
  return spec;
}

/// The moment functional named by a family spec.
inline MomentFunctional builtin(const FamilySpec& s) {
  const std::string& f = s.name;
  if (f == "jacobi") return jacobi_functional(s.scalar("a"), s.scalar("b"));
  if (f == "laguerre") return laguerre_functional(s.scalar("alpha"));
  if (f == "chebyshev") return chebyshev_functional(s.integer("kind", 1));
  if (f == "product-chebyshev") return product_chebyshev_functional(s.integer("kind", 1), s.integer("d", 2));
  if (f == "koornwinder-chebyshev" || f == "cheb-koornwinder") return koornwinder_chebyshev_functional(s.integer("kind", 1));
  if (f == "disk") return disk_functional(s.scalar("mu"));
  if (f == "simplex") return simplex_functional(s.list("k"));
  if (f == "cube") return cube_functional(s.list("a"), s.list("b"));
  if (f == "multi-laguerre") return multi_laguerre_functional(s.list("k"));
  if (f == "krall-laguerre") return krall_laguerre_functional(s.scalar("alpha"), s.scalar("a1"));
  if (f == "krall-jacobi") return krall_jacobi_functional(s.scalar("alpha"), s.scalar("beta"), s.scalar("a1"));
  throw ParseError("unknown family '" + f + "'");
}

inline MomentFunctional builtin(const std::string& text) { return builtin(parse_family_spec(text)); }

/// Univariate recurrences by name: jacobi(a, b), laguerre(alpha), chebyshev(kind).
inline Recurrence1D recurrence1d(const FamilySpec& s, int n) {
  if (s.name == "jacobi") return jacobi_recurrence(s.scalar("a"), s.scalar("b"), n);
  if (s.name == "laguerre") return laguerre_recurrence(s.scalar("alpha"), n);
  if (s.name == "chebyshev") return chebyshev_recurrence(s.integer("kind", 1), n);
  throw ParseError("no recurrence for family '" + s.name + "'");
}

}  // namespace mvops
