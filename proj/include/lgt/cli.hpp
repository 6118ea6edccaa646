#pragma once

// Command-line front end.  `run` is the whole program minus process exit so
// tests can drive it in-process.
//
// Exit codes: 0 bounded / saturating / success, 1 unbounded / growing /
// chain violations, 2 inconclusive, 64 usage error, 65 data error.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lgt/conditions.hpp"
#include "lgt/io.hpp"
#include "lgt/operators.hpp"
#include "lgt/rearrangement.hpp"
#include "lgt/verification.hpp"
#include "lgt/weights.hpp"

namespace lgt::cli {

inline constexpr int kUsage = 64;
inline constexpr int kData = 65;

namespace detail {

inline std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

inline int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::Bounded: return 0;
    case Verdict::Unbounded: return 1;
    case Verdict::Inconclusive: return 2;
  }
  return 2;
}

inline int verdict_code(RatioVerdict v) {
  switch (v) {
    case RatioVerdict::Saturating: return 0;
    case RatioVerdict::Growing: return 1;
    case RatioVerdict::Inconclusive: return 2;
  }
  return 2;
}

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace detail

struct RunConfig {
  std::string command;
  std::string check_set;
  double p = 2.0;
  double q = 2.0;
  std::string phi = "pow(a0=0,ainf=0)";
  std::string phi1 = "pow(a0=0,ainf=0)";
  std::string phi2 = "pow(a0=0,ainf=0)";
  std::string u = "pow(a0=0,ainf=0)";
  std::string v;
  std::string w = "pow(a0=0,ainf=0)";
  std::string t = "pow(a0=0,ainf=0)";
  bool v_from_u = false;
  std::string kernel = "log-ratio";
  std::string f_path;
  std::string op = "stieltjes";
  std::string space = "lp";
  std::string family = "random";
  std::size_t samples = 20;
  std::size_t knots = 8;
  std::uint64_t seed = 1;
  std::string grid;
  std::string output;
  std::string format;  // json, or csv for rearrange
};

namespace detail {

inline GeometricGrid grid_of(const RunConfig& c) {
  try {
    return c.grid.empty() ? GeometricGrid::from_environment() : GeometricGrid::parse(c.grid);
  } catch (const Error& e) {
    throw Usage(e.what());
  }
}

inline void require_pq(const RunConfig& c) {
  if (!(c.p > 1.0) || !(c.q > 1.0) || c.q < c.p) throw Usage("need 1 < p <= q");
}

inline std::string report_text(const ConditionReport& r, const std::string& format) {
  if (format == "json") return to_json(r).dump(2) + "\n";
  std::ostringstream out;
  out << "name,sup,argmax_t,slope_lo,slope_hi,verdict\n";
  for (const auto& c : r.conditions) {
    out << c.name << ',' << fmt(c.sup) << ',' << fmt(c.argmax_t) << ',' << fmt(c.slope_lo) << ',' << fmt(c.slope_hi)
        << ',' << to_string(c.verdict) << '\n';
  }
  return out.str();
}

inline int cmd_check(const RunConfig& c, std::string& text) {
  const GeometricGrid grid = grid_of(c);
  ConditionReport r;
  if (c.check_set == "neugebauer") {
    if (!(c.q > 1.0)) throw Usage("need q > 1");
    const Weight u = io::parse_weight(c.u, grid);
    if (!c.v_from_u && c.v.empty()) throw Usage("neugebauer needs --v or --v-from-u");
    const Weight v = c.v_from_u ? associated_weight_q(u, c.q, grid) : io::parse_weight(c.v, grid);
    r = neugebauer_check(u, v, c.q, grid);
  } else if (c.check_set == "bloom-kerman") {
    require_pq(c);
    ConditionKernel K;
    if (c.kernel == "log-ratio") {
      K = ConditionKernel::log_ratio();
    } else if (c.kernel == "constant") {
      K = ConditionKernel::constant(1.0);
    } else if (c.kernel == "zero") {
      K = ConditionKernel::constant(0.0);
    } else {
      throw Usage("bloom-kerman --kernel must be log-ratio, constant or zero");
    }
    const std::string v = c.v.empty() ? "pow(a0=0,ainf=0)" : c.v;
    r = bloom_kerman_check(K, io::parse_weight(c.t, grid), io::parse_weight(c.u, grid), io::parse_weight(v, grid),
                           io::parse_weight(c.w, grid), c.p, c.q, grid);
  } else {
    require_pq(c);
    r = corollary_s2_check(io::parse_weight(c.phi1, grid), io::parse_weight(c.phi2, grid), c.p, c.q, grid);
  }
  text = report_text(r, c.format);
  return verdict_code(r.verdict);
}

inline int cmd_norm(const RunConfig& c, std::string& text) {
  const GeometricGrid grid = grid_of(c);
  if (!(c.p > 1.0)) throw Usage("need p > 1");
  const StepFunction f = io::read_step_csv(c.f_path);
  const Weight phi = io::parse_weight(c.phi, grid);
  const double n = (c.space == "lp") ? weighted_lp_norm(f, WeightedLpSpec{c.p, phi}, grid)
                                     : lg_norm(f, LGSpaceSpec{c.p, phi}, grid);
  if (c.format == "json") {
    nlohmann::json j{{"norm", n}, {"p", c.p}, {"phi", phi.describe()}, {"space", c.space}};
    text = j.dump(2) + "\n";
  } else {
    text = "norm\n" + fmt(n) + "\n";
  }
  return 0;
}

inline OperatorSpec operator_of(const std::string& name) {
  if (name == "stieltjes") return StieltjesOp{};
  if (name == "s2") return S2ExactOp{};
  if (name == "s2-logform") return S2LogformOp{};
  if (name == "zero") return SampledOp{SampledKernel::constant(0.0, 1e3, 1e3)};
  if (name == "composed-stieltjes") return ComposedOp{IteratedKernel::stieltjes()};
  throw Usage("--op must be stieltjes, s2, s2-logform, zero or composed-stieltjes");
}

inline int cmd_estimate(const RunConfig& c, std::string& text) {
  const GeometricGrid grid = grid_of(c);
  require_pq(c);
  const OperatorSpec op = operator_of(c.op);
  const Weight phi1 = io::parse_weight(c.phi1, grid), phi2 = io::parse_weight(c.phi2, grid);
  NormSpec source = WeightedLpSpec{c.p, phi2}, target = WeightedLpSpec{c.q, phi1};
  InequalityId id = InequalityId::I11;
  if (c.space == "lg") {
    source = LGSpaceSpec{c.p, phi2};
    target = LGSpaceSpec{c.q, phi1};
  } else if (c.space == "i34") {
    source = WeightedLpSpec{c.p, dual_weight(phi2, c.p, grid).pow(1.0 - c.p)};
    target = WeightedLpSpec{c.q, associated_weight_q(phi1, c.q, grid)};
    id = InequalityId::I34;
  } else if (c.space != "lp") {
    throw Usage("--space must be lp, lg or i34");
  }
  EstimateOptions opt;
  opt.seed = c.seed;
  opt.knots = c.knots;
  if (c.family == "extremal") {
    opt.family = TestFamily::Extremal;
  } else if (c.family != "random") {
    throw Usage("--family must be random or extremal");
  }
  const NormRatioEstimate e = estimate_norm_ratio(op, source, target, id, c.samples, grid, opt);
  if (c.format == "json") {
    nlohmann::json j = to_json(e);
    j["params"] = {{"op", c.op}, {"p", c.p}, {"q", c.q}, {"space", c.space}, {"seed", c.seed},
                   {"phi1", phi1.describe()}, {"phi2", phi2.describe()}, {"family", c.family}};
    text = j.dump(2) + "\n";
  } else {
    std::ostringstream out;
    out << "scale,max_ratio\n";
    for (const auto& [s, r] : e.ratio_by_scale) out << fmt(s) << ',' << fmt(r) << '\n';
    text = out.str();
  }
  return verdict_code(e.verdict);
}

inline int cmd_rearrange(const RunConfig& c, std::string& text) {
  const StepFunction g = rearrange(io::read_step_csv(c.f_path));
  if (c.format == "json") {
    nlohmann::json j{{"knots", g.knots()}, {"values", g.values()}};
    text = j.dump(2) + "\n";
  } else {
    text = io::step_csv(g);
  }
  return 0;
}

inline int cmd_chain(const RunConfig& c, std::string& text) {
  const GeometricGrid grid = grid_of(c);
  require_pq(c);
  const OperatorSpec op = (c.kernel == "stieltjes" || c.kernel == "log-ratio")
                              ? OperatorSpec{StieltjesOp{}}
                              : OperatorSpec{SampledOp{io::read_kernel_csv(c.kernel)}};
  const ChainReport r = verify_theorem_chain(op, io::parse_weight(c.phi1, grid), io::parse_weight(c.phi2, grid), c.p,
                                             c.q, c.samples, grid, c.seed);
  if (c.format == "json") {
    text = to_json(r).dump(2) + "\n";
  } else {
    std::ostringstream out;
    out << "kernel,p,q,samples,violations,neugebauer_link,max_constant\n"
        << r.kernel << ',' << fmt(r.p) << ',' << fmt(r.q) << ',' << r.samples << ',' << r.violations << ','
        << fmt(r.max_link_ratio[1]) << ',' << fmt(r.max_constant) << '\n';
    text = out.str();
  }
  return r.violations == 0 ? 0 : 1;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Weighted inequalities for LG spaces, the Stieltjes transform and S^2", "lgt"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* s) {
    s->add_option("--grid", c.grid, "t_min,t_max,points_per_decade (default: LGT_GRID or 1e-8,1e8,32)");
    s->add_option("--output,-o", c.output, "write the report here, atomically, instead of stdout");
    s->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* check = app.add_subcommand("check", "run a boundedness test");
  check->add_option("set", c.check_set, "neugebauer, bloom-kerman or s2-corollary")
      ->required()
      ->check(CLI::IsMember({"neugebauer", "bloom-kerman", "s2-corollary"}));
  check->add_option("--p", c.p);
  check->add_option("--q", c.q);
  check->add_option("--phi1", c.phi1);
  check->add_option("--phi2", c.phi2);
  check->add_option("--u", c.u);
  check->add_option("--v", c.v);
  check->add_flag("--v-from-u", c.v_from_u, "use v = u^(q)");
  check->add_option("--w", c.w);
  check->add_option("--t", c.t);
  check->add_option("--kernel", c.kernel, "log-ratio, constant or zero");
  add_common(check);

  auto* normc = app.add_subcommand("norm", "LG or weighted L^p norm of a step function");
  normc->add_option("--p", c.p);
  normc->add_option("--phi", c.phi);
  normc->add_option("--f", c.f_path)->required();
  normc->add_option("--space", c.space, "lg (default) or lp")->check(CLI::IsMember({"lg", "lp"}));
  add_common(normc);

  auto* est = app.add_subcommand("estimate", "empirical operator-norm ratio over a scale sweep");
  est->add_option("--op", c.op);
  est->add_option("--p", c.p);
  est->add_option("--q", c.q);
  est->add_option("--phi1", c.phi1);
  est->add_option("--phi2", c.phi2);
  est->add_option("--space", c.space, "lp, lg or i34");
  est->add_option("--family", c.family, "random or extremal");
  est->add_option("--samples", c.samples);
  est->add_option("--knots", c.knots);
  est->add_option("--seed", c.seed);
  add_common(est);

  auto* rea = app.add_subcommand("rearrange", "nonincreasing rearrangement of a step function");
  rea->add_option("--f", c.f_path)->required();
  add_common(rea);

  auto* chain = app.add_subcommand("chain", "check the inequality chain on random inputs");
  chain->add_option("--kernel", c.kernel, "kernel CSV file or 'stieltjes'");
  chain->add_option("--p", c.p);
  chain->add_option("--q", c.q);
  chain->add_option("--phi1", c.phi1);
  chain->add_option("--phi2", c.phi2);
  chain->add_option("--samples", c.samples);
  chain->add_option("--seed", c.seed);
  add_common(chain);

  std::vector<std::string> storage{"lgt"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  c.space = "";
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "lgt: usage: " << e.what() << '\n';
    return kUsage;
  }

  if (c.format.empty()) c.format = rea->parsed() ? "csv" : "json";
  std::string text;
  int code = 0;
  try {
    if (check->parsed()) {
      code = detail::cmd_check(c, text);
    } else if (normc->parsed()) {
      if (c.space.empty()) c.space = "lg";
      code = detail::cmd_norm(c, text);
    } else if (est->parsed()) {
      if (c.space.empty()) c.space = "lp";
      code = detail::cmd_estimate(c, text);
    } else if (rea->parsed()) {
      code = detail::cmd_rearrange(c, text);
    } else {
      if (c.kernel == "log-ratio") c.kernel = "stieltjes";
      code = detail::cmd_chain(c, text);
    }
  } catch (const detail::Usage& e) {
    err << "lgt: usage: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "lgt: " << e.what() << '\n';
    return kData;
  } catch (const CLI::Error& e) {
    err << "lgt: usage: " << e.what() << '\n';
    return kUsage;
  }
  try {
    if (c.output.empty()) {
      out << text;
    } else {
      io::atomic_write(c.output, text);
    }
  } catch (const Error& e) {
    err << "lgt: " << e.what() << '\n';
    return kData;
  }
  return code;
}

}  // namespace lgt::cli
