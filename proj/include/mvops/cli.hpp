// Command-line front end. run() is the whole program minus process setup,
// so tests can drive it with argument vectors and capture its output.
#pragma once

#include "mvops/catalog.hpp"
#include "mvops/construct.hpp"
#include "mvops/families.hpp"
#include "mvops/linrel.hpp"
#include "mvops/manifest.hpp"
#include "mvops/report.hpp"
#include "mvops/ttr.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mvops::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

/// Result of one subcommand. Overall pass is the conjunction of the records.
struct Verdict {
  std::string command;
  Tolerances tol;
  Report report;
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> lines;       // extra plain-text lines, printed before the records
  std::optional<bool> expected_negative;  // the failure is the predicted outcome
  double timing_ms = 0;

  bool pass() const { return report.pass(); }
};

inline std::string short_num(Real x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", static_cast<double>(x));
  return buf;
}

inline std::string format_record(const CheckRecord& r) {
  std::string s = r.pass ? "PASS  " : "FAIL  ";
  s += r.name;
  if (r.degree >= 0 || r.direction >= 0) {
    s += " (";
    if (r.degree >= 0) s += "n=" + std::to_string(r.degree);
    if (r.degree >= 0 && r.direction >= 0) s += ", ";
    if (r.direction >= 0) s += "i=" + std::to_string(r.direction);
    s += ")";
  }
  if (r.residual) s += ": residual " + short_num(*r.residual) + " (tol " + short_num(r.tolerance.value_or(0)) + ")";
  if (r.rank) s += ": rank " + std::to_string(*r.rank) + ", expected " + std::to_string(r.expected_rank.value_or(-1));
  if (!r.note.empty()) s += (r.residual || r.rank ? "; " : ": ") + r.note;
  return s;
}

inline nlohmann::json to_json(const Verdict& v) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : v.report.records) recs.push_back(mvops::to_json(r));
  nlohmann::json j{{"command", v.command},
                   {"manifest", manifest::kManifestVersion},
                   {"tolerances", {{"rank", static_cast<double>(v.tol.rank)}, {"residual", static_cast<double>(v.tol.res)}}},
                   {"records", recs},
                   {"pass", v.pass()},
                   {"timing_ms", v.timing_ms},
                   {"details", v.details}};
  if (v.expected_negative) j["expected_negative"] = *v.expected_negative;
  return j;
}

/// Plain text: extra lines, then failing records (all records when verbose).
inline void print_text(std::ostream& os, const Verdict& v, bool verbose) {
  os << v.command << "\n";
  os << "tolerances: rank " << short_num(v.tol.rank) << ", residual " << short_num(v.tol.res) << "\n";
  for (const auto& l : v.lines) os << l << "\n";
  int failed = 0;
  for (const auto& r : v.report.records) {
    if (!r.pass) ++failed;
    if (verbose || !r.pass) os << "  " << format_record(r) << "\n";
  }
  os << "checks: " << v.report.records.size() - static_cast<std::size_t>(failed) << "/" << v.report.records.size()
     << " passed\n";
  os << "result: " << (v.pass() ? "PASS" : "FAIL");
  if (!v.pass() && v.expected_negative.value_or(false)) os << " (matches expectation: not orthogonal)";
  os << "\n";
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

inline nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline LinearRelation read_relation(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return relation_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  std::istringstream is(text);
  return relation_from_text(is);
}

inline std::string echo(const std::vector<std::string>& args) {
  std::string s = "mvops";
  for (const auto& a : args) s += " " + a;
  return s;
}

/// Tolerance precedence: flag, then MVOPS_TOL_RANK, then the default.
inline Real rank_tolerance(const std::optional<std::string>& flag) {
  if (flag) return parse_real(*flag);
  if (const char* env = std::getenv("MVOPS_TOL_RANK"); env && *env) return parse_real(env);
  return kRankTol;
}

inline std::string verdict_word(bool orthogonal) { return orthogonal ? "orthogonal" : "not orthogonal"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands.

struct FamilyArgs {
  std::string name;
  int N = 5;
  std::vector<std::pair<std::string, std::string>> params;  // key, raw value
};

inline Verdict cmd_family(const FamilyArgs& a, const Tolerances& tol) {
  std::string text = a.name;
  for (const auto& [k, v] : a.params) {
    text += text.find(':') == std::string::npos ? ":" : ",";
    text += k + "=" + v;
  }
  const FamilySpec spec = parse_family_spec(text);
  const FamilyEntry& entry = find_family(spec.name);
  if (a.N < 1) throw std::invalid_argument("need --N >= 1");
  const FamilyReport fr = entry.run(spec, a.N, tol);

  Verdict v;
  v.report = fr.checks;
  v.details = to_json(fr);
  v.lines.push_back("family: " + fr.family + " (" + fr.params + ")");
  if (fr.orthogonal) {
    v.report.add(flag_check("orthogonality verdict", *fr.orthogonal, detail::verdict_word(*fr.orthogonal)));
    if (fr.expected_orthogonal) {
      v.lines.push_back("verdict: " + detail::verdict_word(*fr.orthogonal) +
                        " (expected: " + detail::verdict_word(*fr.expected_orthogonal) + ")");
      if (!*fr.expected_orthogonal) v.expected_negative = fr.checks.pass() && !*fr.orthogonal;
    }
  }
  if (fr.details.contains("ctilde_alignment"))
    v.lines.push_back("C~ closed form: " + fr.details["ctilde_alignment"].get<std::string>());
  if (fr.details.contains("pair")) {
    const auto& p = fr.details["pair"];
    std::string l = "rank class: " + p["classification"].get<std::string>();
    if (p.contains("lambda")) {
      std::ostringstream os;
      os << "; lambda = " << short_num(p["lambda"]["b"].get<double>());
      int i = 1;
      for (double c : p["lambda"]["a"]) os << " + " << short_num(c) << "*x" << i++;
      l += os.str();
    }
    v.lines.push_back(l);
  }
  return v;
}

inline Verdict cmd_counterexample(int n_max, const Tolerances& tol) {
  const Counterexample cx = counterexample(n_max, tol.rank, tol.res);
  Verdict v;
  const Real ref = cx.q_side.scale();
  for (int n = 1; n <= n_max; ++n) {
    const int r = numeric_rank(cx.q_side.C[static_cast<std::size_t>(n)][0], tol.rank, ref);
    v.report.add(rank_check("rank C~ in direction 1", n, 1, r, n - 1));
    v.lines.push_back("n=" + std::to_string(n) + ": rank " + std::to_string(r) + ", expected n-1 = " + std::to_string(n - 1) +
                      (r == n - 1 ? "  PASS" : "  FAIL"));
  }
  // Every other block keeps full rank and compatibility holds. At n = 1 the
  // direction-1 block is zero, so the joint block there is short by one.
  for (const auto& r : cx.outcome.report.records) {
    if (r.name == "rank C~" && r.direction == 1) continue;
    if (r.name == "rank joint C~^t" && r.degree == 1) {
      v.lines.push_back("n=1: joint rank " + std::to_string(*r.rank) + " of " + std::to_string(*r.expected_rank) +
                        ", implied by the zero direction-1 block");
      continue;
    }
    v.report.add(r);
  }
  const GeneratedSystem g = generate_from_ttr(cx.q_side, cx.q_side.size());
  v.report.add(residual_check("three-term consistency of the generated system", -1, -1, g.max_residual(), tol.res));
  v.report.add(residual_check("closed forms of B~ and C~", -1, -1, cx.closed_form_residual, tol.res));
  v.details = {{"n_max", n_max}, {"ttr_consistency", static_cast<double>(g.max_residual())},
               {"closed_form_residual", static_cast<double>(cx.closed_form_residual)}};
  return v;
}

inline void perturb(LinearRelation& r, Real eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (auto& m : r.M)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += eps * static_cast<Real>(dist(rng));
  r.M_hat = r.M;
}

inline Verdict cmd_check(int theorem, const std::string& ttr_path, const std::string& rel_path, Real perturbation,
                         std::uint64_t seed, const Tolerances& tol) {
  if (theorem != 3 && theorem != 4) throw ParseError("--theorem must be 3 or 4");
  const ThreeTermData t = ttr_from_json(detail::read_json(ttr_path));
  LinearRelation rel = detail::read_relation(rel_path);
  if (rel.d != t.d) throw ParseError("dimension of the relation blocks does not match the three-term data");
  if (perturbation != 0) perturb(rel, perturbation, seed);
  const TheoremOutcome out = theorem == 3 ? theorem3_check(t, rel, tol.res) : theorem4_construct(t, rel, tol.rank, tol.res);
  Verdict v;
  v.report = out.report;
  v.lines.push_back(std::string(theorem == 3 ? "Q known, P built" : "P known, Q built") + " from " +
                    std::to_string(std::min(t.size(), rel.max_degree())) + " degrees; verdict: " +
                    detail::verdict_word(out.verdict()));
  v.details = {{"theorem", theorem}, {"verdict", out.verdict()}, {"partner", to_json(out.partner)}};
  if (perturbation != 0) v.details["perturbation"] = {{"eps", static_cast<double>(perturbation)}, {"seed", seed}};
  return v;
}

inline Verdict cmd_generate(const std::string& ttr_path, int N, const std::optional<std::string>& functional,
                            const std::optional<std::string>& out_path, const Tolerances& tol) {
  const ThreeTermData t = ttr_from_json(detail::read_json(ttr_path));
  if (N < 0) N = t.size();
  Verdict v;
  v.report = validate_rank_conditions(t, tol.rank);
  const GeneratedSystem g = generate_from_ttr(t, N);
  for (std::size_t n = 0; n < g.residuals.size(); ++n)
    v.report.add(residual_check("three-term consistency", static_cast<int>(n) + 1, -1, g.residuals[n], tol.res));
  if (functional) {
    const MomentFunctional u = builtin(*functional);
    if (u.dim() != t.d) throw ParseError("functional dimension does not match the three-term data");
    v.report.add(residual_check("orthogonality against " + u.label(), -1, -1, orthogonality_defect(u, g.system), tol.res));
  }
  if (out_path) detail::write_file(*out_path, to_json(g.system).dump(1) + "\n");
  v.lines.push_back("generated degrees 0.." + std::to_string(N) + " in " + std::to_string(t.d) + " variables");
  v.details = {{"system", to_json(g.system)}};
  return v;
}

inline Verdict cmd_relate(const std::string& q_path, const std::string& p_path, const std::string& p_functional,
                          const std::optional<std::string>& q_functional, const std::optional<std::string>& out_path,
                          const Tolerances& tol) {
  const PolySystem q = polysystem_from_json(detail::read_json(q_path));
  const PolySystem p = polysystem_from_json(detail::read_json(p_path));
  if (q.dim() != p.dim()) throw ParseError("the two systems have different dimensions");
  if (q.max_degree() != p.max_degree()) throw ParseError("the two systems have different degrees");
  const MomentFunctional u = builtin(p_functional);
  if (u.dim() != p.dim()) throw ParseError("functional dimension does not match the systems");
  Verdict v;
  LinearRelation rel;
  if (q_functional) {
    const MomentFunctional w = builtin(*q_functional);
    if (w.dim() != q.dim()) throw ParseError("functional dimension does not match the systems");
    const PairAnalysis a = analyze_pair(q, w, p, u, std::nullopt, tol);
    v.report = a.report;
    rel = a.relation;
    v.details = {{"pair", to_json(a)}};
  } else {
    rel = compute_relation(q, p, u, gram_blocks(u, p));
    v.report.add(residual_check("orthogonality of P", -1, -1, orthogonality_defect(u, p), tol.res));
    for (int n = 2; n <= rel.max_degree(); ++n)
      v.report.add(residual_check("fourier tail", n, -1, rel.tail_by_degree[static_cast<std::size_t>(n)], tol.res));
  }
  const auto cls = classify_ranks(rel, tol.rank);
  v.lines.push_back("rank class: " + to_string(cls.cls));
  v.details["relation"] = to_json(rel);
  if (out_path) detail::write_file(*out_path, to_json(rel).dump(1) + "\n");
  return v;
}

inline Verdict cmd_system(const std::string& functional, int N, const std::optional<std::string>& out_path,
                          const std::optional<std::string>& ttr_path, const Tolerances& tol) {
  const MomentFunctional u = builtin(functional);
  if (N < 0) throw std::invalid_argument("need --N >= 0");
  Verdict v;
  try {
    const auto [p, h] = gram_schmidt_monic(u, N, tol.rank);
    v.report.add(residual_check("orthogonality", -1, -1, orthogonality_defect(u, p), tol.res));
    v.details = {{"system", to_json(p)}};
    if (out_path) detail::write_file(*out_path, to_json(p).dump(1) + "\n");
    if (ttr_path) {
      if (N < 1) throw std::invalid_argument("three-term data needs --N >= 1");
      const ThreeTermData t = compute_ttr(p, u, h, tol.res);
      detail::write_file(*ttr_path, to_json(t).dump(1) + "\n");
    }
    v.lines.push_back("monic system for " + u.label() + " through degree " + std::to_string(N));
  } catch (const QuasiDefiniteFailure& e) {
    CheckRecord r = flag_check("quasi-definite", false, e.what());
    r.degree = e.degree();
    v.report.add(r);
    v.details = {{"failure_degree", e.degree()}, {"singular_gram_block", e.gram_block()}};
  }
  return v;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linearly related multivariate orthogonal polynomial systems: checks and constructions", "mvops"};
  app.require_subcommand(1);
  std::optional<std::string> tol_rank_flag;
  Real tol_res = kResidualTol;
  bool json = false, verbose = false;
  std::uint64_t seed = 1;
  app.add_option("--tol-rank", tol_rank_flag, "relative rank tolerance (default 1e-9, or MVOPS_TOL_RANK)")->type_name("FLOAT");
  app.add_option("--tol-res", tol_res, "residual tolerance (default 1e-8)");
  app.add_flag("--json", json, "print the report as JSON");
  app.add_flag("-v,--verbose", verbose, "print every check, not only failures");
  app.add_option("--seed", seed, "seed for randomized perturbations");

  FamilyArgs fam;
  auto* family = app.add_subcommand("family", "run a catalog family and all relation checks");
  family->add_option("name", fam.name, "family name, optionally with parameters as name:key=v,...")->required();
  family->add_option("--N", fam.N, "highest degree checked")->capture_default_str();
  std::vector<std::pair<std::string, std::optional<std::string>>> fam_opts;
  for (const char* key : {"mu", "kind", "rho", "alpha", "beta", "a1", "gamma", "delta", "k", "a", "b", "j", "shift"})
    fam_opts.emplace_back(key, std::nullopt);
  for (auto& [key, value] : fam_opts) family->add_option("--" + key, value, "family parameter " + key);
  std::string list_names;
  for (const auto& e : family_registry()) list_names += "\n  " + e.name + ": " + e.summary;
  family->footer("Families:" + list_names);

  int cx_n = manifest::kCounterexampleMax;
  auto* cx = app.add_subcommand("counterexample", "the compatible but non-orthogonal two-variable example");
  cx->add_option("--n", cx_n, "highest degree")->capture_default_str();

  int theorem = 0;
  std::string ttr_file, rel_file;
  double perturbation = 0;
  auto* check = app.add_subcommand("check", "decide orthogonality of the partner system from three-term data and M blocks");
  check->add_option("--theorem", theorem, "3: Q known; 4: P known")->required();
  check->add_option("--ttr", ttr_file, "three-term data of the known system (JSON)")->required();
  check->add_option("--relation", rel_file, "M_1..M_K (LinearRelation JSON or plain matrices)")->required();
  check->add_option("--perturb", perturbation, "add uniform noise of this size to every M block (uses --seed)");

  std::string gen_ttr;
  int gen_n = -1;
  std::optional<std::string> gen_functional, gen_out;
  auto* gen = app.add_subcommand("generate", "build a system forward from three-term data");
  gen->add_option("--ttr", gen_ttr, "three-term data (JSON)")->required();
  gen->add_option("--N", gen_n, "highest degree (default: all available)");
  gen->add_option("--functional", gen_functional, "check orthogonality against this catalog functional");
  gen->add_option("--out", gen_out, "write the system (JSON)");

  std::string rel_q, rel_p, rel_u;
  std::optional<std::string> rel_v, rel_out;
  auto* relate = app.add_subcommand("relate", "compute M_n between two serialized systems");
  relate->add_option("--q", rel_q, "system Q (JSON)")->required();
  relate->add_option("--p", rel_p, "system P (JSON)")->required();
  relate->add_option("--functional", rel_u, "functional of P, as a catalog spec")->required();
  relate->add_option("--q-functional", rel_v, "functional of Q; enables lambda and the M-H identity");
  relate->add_option("--out", rel_out, "write the relation (JSON)");

  std::string sys_functional;
  int sys_n = 5;
  std::optional<std::string> sys_out, sys_ttr;
  auto* sys = app.add_subcommand("system", "monic orthogonal system of a catalog functional by Gram-Schmidt");
  sys->add_option("functional", sys_functional, "catalog spec, e.g. disk:mu=0")->required();
  sys->add_option("--N", sys_n, "highest degree")->capture_default_str();
  sys->add_option("--out", sys_out, "write the system (JSON)");
  sys->add_option("--ttr-out", sys_ttr, "write its three-term data (JSON)");

  for (auto* s : {family, cx, check, gen, relate, sys}) s->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  Verdict v;
  try {
    Tolerances tol;
    tol.rank = detail::rank_tolerance(tol_rank_flag);
    tol.res = tol_res;
    if (!(tol.rank > 0) || !(tol.res > 0)) throw ParseError("tolerances must be positive");
    const auto start = std::chrono::steady_clock::now();
    if (family->parsed()) {
      for (const auto& [key, value] : fam_opts)
        if (value) fam.params.emplace_back(key, *value);
      v = cmd_family(fam, tol);
    } else if (cx->parsed()) {
      if (cx_n < 2) throw ParseError("--n must be at least 2");
      v = cmd_counterexample(cx_n, tol);
    } else if (check->parsed()) {
      v = cmd_check(theorem, ttr_file, rel_file, perturbation, seed, tol);
    } else if (gen->parsed()) {
      v = cmd_generate(gen_ttr, gen_n, gen_functional, gen_out, tol);
    } else if (relate->parsed()) {
      v = cmd_relate(rel_q, rel_p, rel_u, rel_v, rel_out, tol);
    } else {
      v = cmd_system(sys_functional, sys_n, sys_out, sys_ttr, tol);
    }
    v.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    v.command = detail::echo(args);
    v.tol = tol;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitFail;
  }

  if (json) out << to_json(v).dump(2) << "\n";
  else print_text(out, v, verbose);
  return v.pass() ? kExitPass : kExitFail;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace mvops::cli
