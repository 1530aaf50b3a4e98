#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chaoscale/chaos.hpp"
#include "chaoscale/error.hpp"
#include "chaoscale/iterated.hpp"
#include "chaoscale/ldp.hpp"
#include "chaoscale/path.hpp"
#include "chaoscale/rough_path.hpp"
#include "chaoscale/serialize.hpp"
#include "chaoscale/skeleton.hpp"
#include "chaoscale/system.hpp"
#include "chaoscale/tail.hpp"

namespace chaoscale {

/// Exit statuses of the runner.
enum ExitStatus : int { exit_ok = 0, exit_check_failed = 1, exit_parse = 2, exit_domain = 3, exit_numerical = 4 };

/// One run: subcommand, its JSON parameters, and the directory relative
/// file names in the parameters are resolved against.
struct ExperimentConfig {
  std::string subcommand;
  Json params = Json::object();
  std::filesystem::path base_dir = ".";
  std::optional<std::uint64_t> seed_override;  ///< --seed, ahead of CHAOSCALE_SEED and the config
};

struct Artifact {
  std::string name;
  std::string text;
};

struct RunOutput {
  int status = exit_ok;
  Json result;
  std::vector<Artifact> artifacts;  ///< CSV tables, written only when an output directory is given
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "skeleton", "pvar", "tail", "rate", "slope", "verify"};
  return names;
}

namespace detail {

inline std::uint64_t parse_seed(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": invalid seed \"" + text + "\"");
  }
}

class Params {
public:
  Params(const Json& j, std::filesystem::path base) : j_(j), base_(std::move(base)) {}

  const Json& raw_object() const { return j_; }
  bool has(const char* key) const { return j_.contains(key); }
  const Json& raw(const char* key) const { return field(j_, key, "config"); }

  double real(const char* key, double fallback) const {
    return has(key) ? as_double(j_.at(key), std::string("config.") + key) : fallback;
  }
  double real(const char* key) const { return as_double(raw(key), std::string("config.") + key); }
  std::size_t count(const char* key, std::size_t fallback) const {
    return has(key) ? as_size(j_.at(key), std::string("config.") + key) : fallback;
  }
  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw ParseError(std::string("config.") + key + ": expected a boolean");
    return j_.at(key).get<bool>();
  }

  /// Inline object, or a file name relative to the config directory.
  Json document(const Json& v, const std::string& where) const {
    if (v.is_object()) return v;
    if (v.is_string()) {
      std::filesystem::path p = v.get<std::string>();
      if (p.is_relative()) p = base_ / p;
      return load_json_file(p);
    }
    throw ParseError(where + ": expected an object or a file name");
  }
  Json document(const char* key) const { return document(raw(key), std::string("config.") + key); }

  ChaosVector chaos() const { return chaos_from_json(document("chaos")); }

private:
  const Json& j_;
  std::filesystem::path base_;
};

inline std::uint64_t resolve_seed(const ExperimentConfig& cfg) {
  if (cfg.seed_override) return *cfg.seed_override;
  if (const char* env = std::getenv("CHAOSCALE_SEED"); env && *env) return parse_seed(env, "CHAOSCALE_SEED");
  if (!cfg.params.contains("seed")) return 0;
  const auto& s = cfg.params.at("seed");
  if (s.is_number_unsigned()) return s.get<std::uint64_t>();
  if (s.is_number_integer() && s.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(s.get<std::int64_t>());
  if (s.is_string()) return parse_seed(s.get<std::string>(), "config.seed");
  throw ParseError("config.seed: expected a nonnegative integer");
}

inline std::vector<double> ladder_of(const Params& p) {
  return as_doubles(p.raw("ladder"), "config.ladder");
}

inline EventSpec event_of(const Params& p) {
  const auto& e = p.raw("event");
  only_keys(e, {"kind", "delta", "center", "radius"}, "event");
  const auto& kind = field(e, "kind", "event");
  if (!kind.is_string()) throw ParseError("event: kind must be a string");
  const auto k = kind.get<std::string>();
  if (k == "sup_exceed") return EventSpec::sup_exceed(as_double(field(e, "delta", "event"), "event.delta"));
  if (k == "terminal_exceed") return EventSpec::terminal_exceed(as_double(field(e, "delta", "event"), "event.delta"));
  if (k == "ball_complement")
    return EventSpec::ball_complement(grid_path_from_json(p.document(field(e, "center", "event"), "event.center")),
                                      as_double(field(e, "radius", "event"), "event.radius"));
  throw ParseError("event: unknown kind \"" + k + "\"");
}

inline RateOptions rate_options_of(const Params& p, std::uint64_t seed) {
  RateOptions o;
  o.seed = seed;
  if (!p.has("optimizer")) return o;
  const auto& j = p.raw("optimizer");
  only_keys(j, {"m_opt", "penalties", "tol_feas", "starts", "start_level", "max_iter"}, "optimizer");
  const Params q(j, ".");
  o.m_opt = q.count("m_opt", o.m_opt);
  if (q.has("penalties")) o.penalties = as_doubles(j.at("penalties"), "optimizer.penalties");
  o.tol_feas = q.real("tol_feas", o.tol_feas);
  o.starts = q.count("starts", o.starts);
  o.start_level = q.real("start_level", o.start_level);
  o.minimize.max_iter = q.count("max_iter", o.minimize.max_iter);
  return o;
}

/// Largest single-order component of x, or 0 when x has several orders.
inline std::size_t single_order(const ChaosVector& x) {
  return x.kernels().size() == 1 ? x.kernels().begin()->first : 0;
}

// simulate

inline RunOutput run_simulate(const Params& p, std::uint64_t seed) {
  only_keys(p.raw_object(), {"subcommand", "chaos", "seed", "eps", "delta", "samples", "m", "paths"}, "config");
  const auto x = p.chaos();
  const double eps = p.real("eps", 1.0);
  const double delta = p.real("delta");
  const auto samples = p.count("samples", 10000);
  const auto m = p.count("m", 4096);
  const auto paths = p.count("paths", 0);
  if (!(delta > 0.0)) throw DomainError("simulate: delta must be > 0");
  const auto est = mc_sup_tail(x, eps, delta, samples, m, seed);
  const double norm = std::sqrt(chaos_norm_sq(x));
  RunOutput out;
  out.result = to_json(est);
  out.result["eps"] = eps;
  out.result["delta"] = delta;
  out.result["m"] = m;
  out.result["seed"] = seed;
  out.result["norm"] = number(norm);
  out.result["bound_doob"] = number(doob_bound(norm, eps, delta));
  out.result["bound_hyper"] = nullptr;
  if (const auto n = single_order(x); n > 0 && norm > 0.0) {
    const double alpha = 0.9 * static_cast<double>(n) / (2.0 * std::numbers::e);
    const double scaled = std::pow(eps, 0.5 * static_cast<double>(n)) * norm;
    out.result["bound_hyper"] = number(hyper_bound(alpha, n, scaled, delta));
    out.result["alpha"] = alpha;
  }
  if (paths > 0) {
    const auto scaled = gamma_scale(x, eps);
    const ItoEvaluator eval(scaled, m);
    std::string csv = "t";
    std::vector<std::vector<double>> ys(paths);
    for (std::size_t k = 0; k < paths; ++k) {
      std::vector<double> dw, a, b;
      sample_increments(m, seed, k, dw);
      eval.evaluate(dw, ys[k], a, b);
      csv += ",path" + std::to_string(k);
    }
    csv += "\n";
    for (std::size_t i = 0; i <= m; ++i) {
      csv += format_double(GridPath::time_of(i, m));
      for (const auto& y : ys) csv += "," + format_double(y[i]);
      csv += "\n";
    }
    out.artifacts.push_back({"paths.csv", std::move(csv)});
  }
  return out;
}

// skeleton

inline RunOutput run_skeleton(const Params& p, std::uint64_t seed) {
  only_keys(p.raw_object(), {"subcommand", "chaos", "seed", "path", "level", "m", "N"}, "config");
  const auto x = p.chaos();
  CameronMartinPath h;
  if (p.has("path")) {
    h = CameronMartinPath(grid_path_from_json(p.document("path")));
  } else {
    h = sample_level_set(p.real("level", 1.0), p.count("m", 64), seed);
  }
  const auto sk = eval_skeleton(x, h);
  std::string csv = "t,F";
  for (const auto& [n, w] : sk.per_order) csv += ",order" + std::to_string(n);
  csv += "\n";
  for (std::size_t i = 0; i <= h.resolution(); ++i) {
    csv += format_double(GridPath::time_of(i, h.resolution())) + "," + format_double(sk.path[i]);
    for (const auto& [n, w] : sk.per_order) csv += "," + format_double(w[i]);
    csv += "\n";
  }
  RunOutput out;
  out.result = {{"energy", number(energy(h))}, {"sup_norm", number(sup_norm(sk.path))}, {"F", to_json(sk.path)}};
  if (p.has("N")) {
    const auto N = p.count("N", 0);
    const double level = energy(h);
    out.result["truncation"] = {
        {"N", N},
        {"gap", number(sup_norm(sk.path - eval_skeleton(truncate(x, N), h).path))},
        {"bound", number(truncation_tail_bound(x, N, level))}};
  }
  out.artifacts.push_back({"skeleton.csv", std::move(csv)});
  return out;
}

// pvar

inline GridRoughPath rough_of(const Json& j) {
  if (j.contains("d")) return rough_path_from_json(j);
  return lift_piecewise_linear(grid_path_from_json(j));
}

inline RunOutput run_pvar(const Params& p, std::uint64_t) {
  only_keys(p.raw_object(), {"subcommand", "seed", "paths", "p", "eps"}, "config");
  const auto& files = p.raw("paths");
  if (!files.is_array() || files.size() != 2) throw ParseError("config.paths: expected two paths");
  auto a = rough_of(p.document(files[0], "config.paths[0]"));
  auto b = rough_of(p.document(files[1], "config.paths[1]"));
  if (p.has("eps")) {
    const double eps = p.real("eps");
    a = dilate(a, eps);
    b = dilate(b, eps);
  }
  const double pv = p.real("p", default_p);
  if (!(pv > 2.0 && pv < 3.0)) throw DomainError("pvar: p must lie in (2,3)");
  const auto terms = p_var_terms(a, b, pv);
  RunOutput out;
  out.result = {{"p", pv},
                {"distance", number(terms.total())},
                {"level1", number(terms.level1)},
                {"level2", number(terms.level2)}};
  return out;
}

// tail

inline RunOutput run_tail(const Params& p, std::uint64_t) {
  only_keys(p.raw_object(), {"subcommand", "chaos", "seed", "eps", "delta", "alpha", "N", "L"}, "config");
  const auto x = p.chaos();
  const double eps = p.real("eps", 1.0);
  const double delta = p.real("delta");
  const double norm = std::sqrt(chaos_norm_sq(x));
  RunOutput out;
  Json comps = Json::object();
  for (const auto& [n, v] : chaos_components(x)) comps[std::to_string(n)] = number(v);
  out.result = {{"norm", number(norm)}, {"components", comps}, {"bound_doob", number(doob_bound(norm, eps, delta))}};
  if (const auto n = single_order(x); n > 0) {
    const double alpha = p.real("alpha", 0.9 * static_cast<double>(n) / (2.0 * std::numbers::e));
    const double scaled = std::pow(eps, 0.5 * static_cast<double>(n)) * norm;
    out.result["alpha"] = alpha;
    out.result["tail_constant"] = number(tail_constant(alpha, n));
    out.result["bound_hyper"] = norm > 0.0 ? number(hyper_bound(alpha, n, scaled, delta)) : Json(0.0);
  } else if (p.has("alpha")) {
    throw DomainError("tail: alpha needs a single-order chaos");
  }
  if (p.has("N")) {
    const auto N = p.count("N", 0);
    const double level = p.real("L", 1.0);
    out.result["truncation"] = {{"N", N}, {"L", level}, {"bound", number(truncation_tail_bound(x, N, level))}};
  }
  return out;
}

// rate

inline RunOutput run_rate(const Params& p, std::uint64_t seed) {
  only_keys(p.raw_object(), {"subcommand", "chaos", "seed", "target", "event", "optimizer"}, "config");
  const auto x = p.chaos();
  const auto opts = rate_options_of(p, seed);
  if (p.has("target") == p.has("event")) throw ParseError("rate: give exactly one of target and event");
  const auto r = p.has("target") ? rate_of_point(x, grid_path_from_json(p.document("target")), opts)
                                 : rate_of_event(x, event_of(p), opts);
  RunOutput out;
  out.result = to_json(r);
  return out;
}

// slope

inline RunOutput run_slope(const Params& p, std::uint64_t seed) {
  only_keys(p.raw_object(),
            {"subcommand", "chaos", "seed", "event", "ladder", "samples", "m", "optimizer", "rate", "equiv"}, "config");
  const auto x = p.chaos();
  const auto ladder = ladder_of(p);
  const auto samples = p.count("samples", 100000);
  const auto m = p.count("m", 1024);
  SlopeResult r;
  if (p.has("equiv")) {
    const auto& e = p.raw("equiv");
    only_keys(e, {"n", "N", "delta"}, "equiv");
    const Params q(e, ".");
    const double delta = q.real("delta");
    if (q.has("N") == q.has("n")) throw ParseError("equiv: give exactly one of n and N");
    r = q.has("N") ? exp_equiv_gap_at(x, q.count("N", 0), delta, ladder, samples, m, seed)
                   : exp_equiv_gap(x, q.count("n", 1), delta, ladder, samples, m, seed);
  } else {
    std::optional<RateOptions> rate;
    if (p.flag("rate", true)) rate = rate_options_of(p, seed);
    r = ldp_slope(x, event_of(p), ladder, samples, m, seed, rate);
  }
  RunOutput out;
  out.result = to_json(r);
  out.artifacts.push_back({"ladder.csv", ladder_csv(r)});
  return out;
}

// verify

class CheckList {
public:
  void add(const std::string& name, double value, double reference, double tolerance) {
    const bool ok = std::abs(value - reference) <= tolerance;
    pass_ = pass_ && ok;
    items_.push_back({{"name", name},
                      {"value", number(value)},
                      {"reference", number(reference)},
                      {"tolerance", number(tolerance)},
                      {"pass", ok}});
  }
  void below(const std::string& name, double value, double ceiling) {
    const bool ok = value <= ceiling;
    pass_ = pass_ && ok;
    items_.push_back({{"name", name}, {"value", number(value)}, {"ceiling", number(ceiling)}, {"pass", ok}});
  }
  void truth(const std::string& name, bool ok) {
    pass_ = pass_ && ok;
    items_.push_back({{"name", name}, {"pass", ok}});
  }
  bool pass() const { return pass_; }
  Json json() const { return items_; }

private:
  Json items_ = Json::array();
  bool pass_ = true;
};

inline RunOutput run_verify(const Params& p, std::uint64_t seed, const std::filesystem::path& base) {
  only_keys(p.raw_object(), {"subcommand", "seed", "samples", "m", "golden"}, "config");
  const auto samples = p.count("samples", 2000);
  const auto m = p.count("m", 512);
  if (samples < 1000) throw DomainError("verify: samples must be >= 1000");
  CheckList c;
  const auto one = FactorFn::constant(1.0);
  ChaosVector id, sq, two;
  id.add(Kernel::power(1, one));
  sq.add(Kernel::power(2, one));
  two.add(Kernel::power(1, one, std::sqrt(0.5))).add(Kernel::power(2, one));

  const auto line = CameronMartinPath(GridPath::sample(1024, [](double t) { return t; }));
  c.add("energy of h(t)=t", energy(line), 0.5, 1e-12);
  c.add("skeleton of 1x1 at h(t)=t", eval_skeleton(sq, line).path.back(), 0.5, 1e-6);
  c.add("permanent vs symmetrized cube norm", symmetric_norm_sq(two.find(2)->scaled(1.0)),
        cube_norm_sq(symmetrize(*two.find(2))), 1e-12);

  double hermite = 0.0, hu_meyer = 0.0, system_gap = 0.0;
  const ProductTerm term2{1.0, {one, one}};
  const auto sys = build_system(two, 0.5);
  const auto half = gamma_scale(two, 0.5);
  for (std::uint64_t k = 0; k < 16; ++k) {
    const auto w = sample_bm(m, seed, k);
    double qv = 0.0;
    for (std::size_t i = 0; i < m; ++i) qv += (w.path[i + 1] - w.path[i]) * (w.path[i + 1] - w.path[i]);
    hermite = std::max(hermite, std::abs(ito_iterated(term2, w).back() - 0.5 * (w.path.back() * w.path.back() - qv)));
    hu_meyer += hu_meyer_gap(term2, w).back() / 16.0;
    system_gap = std::max(system_gap, sup_norm(integrate_system(sys, w) - ito_chaos(half, w.path)));
  }
  c.below("Hermite identity", hermite, 1e-12);
  c.add("Hu-Meyer gap mean", hu_meyer, 0.5, 0.05);
  c.below("system vs iterated sum", system_gap, 0.1);

  const auto w = sample_bm(64, seed, 99);
  const auto lift = lift_piecewise_linear(w.path);
  const auto seg = chen_compose(lift.segment(0, 20), lift.segment(20, 64));
  const auto full = lift.segment(0, 64);
  c.below("Chen identity", std::abs(seg.level2[0] - full.level2[0]), 1e-12);
  c.add("p-variation distance to itself", p_var_dist(lift, lift), 0.0, 0.0);
  c.add("p-variation of dilation", p_var_dist(dilate(lift, 0.25), lift),
        0.5 * p_var_terms(lift, lift_piecewise_linear(GridPath::zero(64)), default_p).level1 +
            0.75 * p_var_terms(lift, lift_piecewise_linear(GridPath::zero(64)), default_p).level2,
        1e-9);

  const auto tail = mc_sup_tail(id, 0.5, 1.0, samples, 256, substream_seed(seed, 1));
  c.below("tail below Doob bound", tail.mean, doob_bound(1.0, 0.5, 1.0) + 3.0 * tail.std_error);
  const double alpha = 0.9 / (2.0 * std::numbers::e);
  c.below("tail below hypercontractive bound", tail.mean, hyper_bound(alpha, 1, std::sqrt(0.5), 1.0) + 3.0 * tail.std_error);

  RateOptions ro;
  ro.seed = seed;
  ro.starts = 2;
  c.add("rate of sup_exceed(1), identity", rate_of_event(id, EventSpec::sup_exceed(1.0), ro).value, 0.5, 0.01);
  c.add("rate of sup_exceed(0.5), 1x1", rate_of_event(sq, EventSpec::sup_exceed(0.5), ro).value, 0.5, 0.015);
  c.truth("negative target infeasible",
          rate_of_point(sq, GridPath::sample(64, [](double t) { return -t; }), ro).infinite);

  const std::vector<double> ladder{0.2, 0.3, 0.5};
  const auto slope = ldp_slope(id, EventSpec::sup_exceed(1.0), ladder, samples, 256, seed, std::nullopt);
  c.add("identity slope intercept", slope.intercept, -0.5, 0.25);

  RunOutput out;
  out.result = {{"seed", seed}, {"samples", samples}, {"m", m}, {"checks", c.json()}, {"pass", c.pass()}};
  out.status = c.pass() ? exit_ok : exit_check_failed;
  if (p.has("golden")) {
    std::filesystem::path g = p.raw("golden").is_string() ? p.raw("golden").get<std::string>() : "";
    if (g.empty()) throw ParseError("config.golden: expected a file name");
    if (g.is_relative()) g = base / g;
    const auto golden = load_json_file(g);
    const bool same = golden.dump(2) == out.result.dump(2);
    out.result = {{"verify", out.result}, {"golden", g.filename().string()}, {"golden_match", same}};
    if (!same) out.status = exit_check_failed;
  }
  return out;
}

}  // namespace detail

/// Dispatches cfg to its module operation. Errors are reported in the
/// returned status and an {"error": ...} result, never thrown.
inline RunOutput run(const ExperimentConfig& cfg) {
  auto fail = [](int status, const char* kind, const std::string& msg) {
    RunOutput out;
    out.status = status;
    out.result = {{"error", {{"kind", kind}, {"message", msg}}}, {"status", status}};
    return out;
  };
  try {
    if (!cfg.params.is_object()) throw ParseError("config must be a JSON object");
    if (cfg.params.contains("subcommand") && cfg.params.at("subcommand") != cfg.subcommand)
      throw ParseError("config is for subcommand " + cfg.params.at("subcommand").dump());
    const detail::Params p(cfg.params, cfg.base_dir);
    const auto seed = detail::resolve_seed(cfg);
    const auto& s = cfg.subcommand;
    if (s == "simulate") return detail::run_simulate(p, seed);
    if (s == "skeleton") return detail::run_skeleton(p, seed);
    if (s == "pvar") return detail::run_pvar(p, seed);
    if (s == "tail") return detail::run_tail(p, seed);
    if (s == "rate") return detail::run_rate(p, seed);
    if (s == "slope") return detail::run_slope(p, seed);
    if (s == "verify") return detail::run_verify(p, seed, cfg.base_dir);
    throw ParseError("unknown subcommand \"" + s + "\"");
  } catch (const ParseError& e) {
    return fail(exit_parse, "parse", e.what());
  } catch (const Json::exception& e) {
    return fail(exit_parse, "parse", e.what());
  } catch (const DomainError& e) {
    return fail(exit_domain, "domain", e.what());
  } catch (const std::domain_error& e) {
    return fail(exit_domain, "domain", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(exit_domain, "domain", e.what());
  } catch (const std::exception& e) {
    return fail(exit_numerical, "numerical", e.what());
  }
}

}  // namespace chaoscale
