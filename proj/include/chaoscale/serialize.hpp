#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chaoscale/chaos.hpp"
#include "chaoscale/error.hpp"
#include "chaoscale/factor.hpp"
#include "chaoscale/ldp.hpp"
#include "chaoscale/path.hpp"
#include "chaoscale/rough_path.hpp"
#include "chaoscale/tail.hpp"

namespace chaoscale {

using Json = nlohmann::json;

/// Finite doubles as numbers, the rest as "inf", "-inf" or "nan".
inline Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

/// %.17g, enough digits to round-trip.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing key \"" + key + "\"");
  return j.at(key);
}

inline double as_double(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError(where + ": expected a number");
}

inline std::size_t as_size(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ParseError(where + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline std::vector<double> as_doubles(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(as_double(e, where));
  return v;
}

inline void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ParseError(where + ": unknown key \"" + k + "\"");
  }
}

}  // namespace detail

inline Json load_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ParseError("cannot write " + file.string());
  out << text;
}

// GridPath: {"m": int, "values": [...]}

inline Json to_json(const GridPath& w) {
  Json v = Json::array();
  for (double x : w.values()) v.push_back(number(x));
  return {{"m", w.resolution()}, {"values", v}};
}

inline GridPath grid_path_from_json(const Json& j) {
  detail::only_keys(j, {"m", "values"}, "path");
  auto values = detail::as_doubles(detail::field(j, "values", "path"), "path.values");
  if (j.contains("m") && detail::as_size(j.at("m"), "path.m") + 1 != values.size())
    throw ParseError("path: m does not match the number of values");
  if (values.size() < 2) throw ParseError("path: need at least two values");
  return GridPath(std::move(values));
}

/// Two columns t,value.
inline std::string to_csv(const GridPath& w) {
  std::string s = "t,value\n";
  for (std::size_t i = 0; i <= w.resolution(); ++i) s += format_double(w.time(i)) + "," + format_double(w[i]) + "\n";
  return s;
}

// ChaosVector

inline Json to_json(const FactorFn& f) {
  switch (f.kind()) {
    case FactorFn::Kind::constant:
      return {{"kind", "constant"}, {"c", std::get<FactorFn::Constant>(f.repr()).c}};
    case FactorFn::Kind::polynomial:
      return {{"kind", "poly"}, {"coeffs", std::get<FactorFn::Polynomial>(f.repr()).coeffs}};
    case FactorFn::Kind::grid:
      return {{"kind", "grid"}, {"m", f.resolution()}, {"samples", std::get<FactorFn::Grid>(f.repr()).samples}};
  }
  return {};
}

inline FactorFn factor_from_json(const Json& j) {
  const auto kind = detail::field(j, "kind", "factor");
  if (!kind.is_string()) throw ParseError("factor: kind must be a string");
  const auto k = kind.get<std::string>();
  if (k == "constant") {
    detail::only_keys(j, {"kind", "c"}, "factor");
    return FactorFn::constant(detail::as_double(detail::field(j, "c", "factor"), "factor.c"));
  }
  if (k == "poly") {
    detail::only_keys(j, {"kind", "coeffs"}, "factor");
    return FactorFn::polynomial(detail::as_doubles(detail::field(j, "coeffs", "factor"), "factor.coeffs"));
  }
  if (k == "grid") {
    detail::only_keys(j, {"kind", "m", "samples"}, "factor");
    auto s = detail::as_doubles(detail::field(j, "samples", "factor"), "factor.samples");
    if (j.contains("m") && detail::as_size(j.at("m"), "factor.m") + 1 != s.size())
      throw ParseError("factor: m does not match the number of samples");
    return FactorFn::grid(std::move(s));
  }
  throw ParseError("factor: unknown kind \"" + k + "\"");
}

inline Json to_json(const ChaosVector& x) {
  Json kernels = Json::array();
  for (const auto& [n, k] : x.kernels()) {
    Json terms = Json::array();
    for (const auto& t : k.terms()) {
      Json factors = Json::array();
      for (const auto& f : t.factors) factors.push_back(to_json(f));
      terms.push_back({{"coeff", t.coeff}, {"factors", factors}});
    }
    kernels.push_back({{"order", n}, {"terms", terms}});
  }
  return {{"kernels", kernels}};
}

inline ChaosVector chaos_from_json(const Json& j) {
  detail::only_keys(j, {"kernels"}, "chaos");
  const auto& kernels = detail::field(j, "kernels", "chaos");
  if (!kernels.is_array()) throw ParseError("chaos: kernels must be an array");
  ChaosVector x;
  for (const auto& kj : kernels) {
    detail::only_keys(kj, {"order", "terms"}, "kernel");
    const auto n = detail::as_size(detail::field(kj, "order", "kernel"), "kernel.order");
    const auto& tj = detail::field(kj, "terms", "kernel");
    if (!tj.is_array()) throw ParseError("kernel: terms must be an array");
    std::vector<ProductTerm> terms;
    for (const auto& t : tj) {
      detail::only_keys(t, {"coeff", "factors"}, "term");
      ProductTerm term;
      term.coeff = t.contains("coeff") ? detail::as_double(t.at("coeff"), "term.coeff") : 1.0;
      const auto& fj = detail::field(t, "factors", "term");
      if (!fj.is_array()) throw ParseError("term: factors must be an array");
      for (const auto& f : fj) term.factors.push_back(factor_from_json(f));
      terms.push_back(std::move(term));
    }
    x.add(Kernel(n, std::move(terms)));
  }
  return x;
}

// GridRoughPath: {"d", "m", "level1": [m][d], "level2": [m][d][d]}

inline Json to_json(const GridRoughPath& x) {
  const auto d = x.dimension();
  Json l1 = Json::array(), l2 = Json::array();
  for (std::size_t s = 0; s < x.resolution(); ++s) {
    const auto a = x.step_level1(s);
    const auto b = x.step_level2(s);
    l1.push_back(std::vector<double>(a.begin(), a.end()));
    Json rows = Json::array();
    for (std::size_t i = 0; i < d; ++i) rows.push_back(std::vector<double>(b.begin() + i * d, b.begin() + (i + 1) * d));
    l2.push_back(rows);
  }
  return {{"d", d}, {"m", x.resolution()}, {"level1", l1}, {"level2", l2}};
}

inline GridRoughPath rough_path_from_json(const Json& j) {
  detail::only_keys(j, {"d", "m", "level1", "level2"}, "rough path");
  const auto d = detail::as_size(detail::field(j, "d", "rough path"), "rough path.d");
  const auto m = detail::as_size(detail::field(j, "m", "rough path"), "rough path.m");
  const auto& l1 = detail::field(j, "level1", "rough path");
  const auto& l2 = detail::field(j, "level2", "rough path");
  if (!l1.is_array() || !l2.is_array() || l1.size() != m || l2.size() != m)
    throw ParseError("rough path: level arrays must have m entries");
  std::vector<double> a, b;
  for (std::size_t s = 0; s < m; ++s) {
    const auto row = detail::as_doubles(l1[s], "rough path.level1");
    if (row.size() != d) throw ParseError("rough path: level1 entry must have d values");
    a.insert(a.end(), row.begin(), row.end());
    if (!l2[s].is_array() || l2[s].size() != d) throw ParseError("rough path: level2 entry must be d x d");
    for (const auto& r : l2[s]) {
      const auto rr = detail::as_doubles(r, "rough path.level2");
      if (rr.size() != d) throw ParseError("rough path: level2 entry must be d x d");
      b.insert(b.end(), rr.begin(), rr.end());
    }
  }
  return GridRoughPath(d, m, std::move(a), std::move(b));
}

// Results

inline Json to_json(const MCEstimate& e) {
  return {{"estimate", number(e.mean)}, {"stderr", number(e.std_error)}, {"samples", e.count}};
}

inline Json to_json(const RateResult& r) {
  Json trace = Json::array();
  for (const auto& [lambda, obj] : r.trace) trace.push_back({number(lambda), number(obj)});
  return {{"value", number(r.value)},
          {"infinite", r.infinite},
          {"residual", number(r.residual)},
          {"converged", r.converged},
          {"start", r.start},
          {"trace", trace},
          {"minimizer", to_json(r.minimizer.path())}};
}

inline Json to_json(const SlopeResult& r) {
  Json ladder = Json::array();
  for (const auto& p : r.ladder) {
    Json e{{"eps", p.eps},
           {"p_hat", number(p.p_hat)},
           {"stderr", number(p.std_error)},
           {"scaled_log", number(p.scaled_log)},
           {"scaled_log_stderr", number(p.scaled_log_se)},
           {"used", p.used}};
    if (!std::isnan(p.ceiling)) e["ceiling"] = number(p.ceiling);
    ladder.push_back(std::move(e));
  }
  Json j{{"ladder", ladder},
         {"intercept", number(r.intercept)},
         {"slope", number(r.slope)},
         {"fit_rms", number(r.fit_rms)},
         {"used", r.used},
         {"excluded", r.excluded}};
  if (r.rate_prediction) j["rate_prediction"] = number(*r.rate_prediction);
  if (r.rate) j["rate"] = to_json(*r.rate);
  if (!std::isnan(r.ceiling)) {
    j["ceiling"] = number(r.ceiling);
    j["truncation"] = r.truncation;
  }
  return j;
}

/// eps,p_hat,stderr,scaled_log,scaled_log_stderr,used
inline std::string ladder_csv(const SlopeResult& r) {
  std::string s = "eps,p_hat,stderr,scaled_log,scaled_log_stderr,used\n";
  for (const auto& p : r.ladder)
    s += format_double(p.eps) + "," + format_double(p.p_hat) + "," + format_double(p.std_error) + "," +
         format_double(p.scaled_log) + "," + format_double(p.scaled_log_se) + "," + (p.used ? "1" : "0") + "\n";
  return s;
}

}  // namespace chaoscale
