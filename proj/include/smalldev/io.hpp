#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "smalldev/boundary.hpp"
#include "smalldev/engines.hpp"
#include "smalldev/error.hpp"
#include "smalldev/spectral.hpp"

namespace smalldev {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
  throw ConfigError("schema error at " + where + ": " + what);
}

inline void reject_unknown_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) schema_error(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) schema_error(where, "unknown key '" + item.key() + "'");
}

inline double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(where, "expected a finite number");
  return v;
}

inline double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? get_number(j.at(key), where + "." + key) : fallback;
}

inline std::uint64_t get_u64(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    schema_error(where, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spectral measures
// ---------------------------------------------------------------------------

inline Json to_json(const SlowlyVaryingFn& ell) {
  switch (ell.family()) {
    case SlowlyVaryingFn::Family::one:
      return "one";
    case SlowlyVaryingFn::Family::log_power:
      return Json{{"log_power", ell.exponent()}};
    case SlowlyVaryingFn::Family::custom:
      break;
  }
  throw ConfigError("custom slowly varying functions cannot be serialized");
}

inline SlowlyVaryingFn ell_from_json(const Json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "one") return SlowlyVaryingFn::one();
    detail::schema_error(where, "unknown slowly varying family '" + j.get<std::string>() + "'");
  }
  detail::reject_unknown_keys(j, where, {"log_power"});
  if (!j.contains("log_power")) detail::schema_error(where, "expected \"one\" or {\"log_power\": a}");
  try {
    return SlowlyVaryingFn::log_power(detail::get_number(j.at("log_power"), where + ".log_power"));
  } catch (const DomainError& e) {
    detail::schema_error(where, e.what());
  }
}

/// {label, H, ell_family, atoms, zones, fgn_scale, flat_level, truncation}.
inline Json to_json(const SpectralMeasure& m) {
  if (!m.serializable()) throw ConfigError("custom densities cannot be serialized");
  Json j;
  j["label"] = m.label();
  j["H"] = m.hurst() ? Json(m.hurst()->H) : Json(nullptr);
  j["ell_family"] = to_json(m.ell());
  Json atoms = Json::array();
  for (const Atom& a : m.atoms()) atoms.push_back({a.u, a.w});
  j["atoms"] = atoms;
  Json zones = Json::array();
  for (const Zone& z : m.zones()) zones.push_back({z.lo, z.hi});
  j["zones"] = zones;
  j["fgn_scale"] = m.hurst() ? m.fgn_scale() : 0.0;
  j["flat_level"] = m.flat_level();
  j["truncation"] = m.truncation();
  return j;
}

inline SpectralMeasure measure_from_json(const Json& j, const std::string& where = "measure") {
  detail::reject_unknown_keys(j, where,
                              {"label", "H", "ell_family", "atoms", "zones", "fgn_scale", "flat_level", "truncation"});
  try {
    const int truncation = j.contains("truncation")
                               ? static_cast<int>(detail::get_u64(j.at("truncation"), where + ".truncation"))
                               : kDefaultTruncation;
    SpectralMeasure m;
    const bool has_h = j.contains("H") && !j.at("H").is_null();
    if (has_h) {
      m = SpectralMeasure::fgn(detail::get_number(j.at("H"), where + ".H"), truncation);
      const double scale = detail::number_or(j, "fgn_scale", 1.0, where);
      if (scale < 0.0) detail::schema_error(where + ".fgn_scale", "must be nonnegative");
      m = m.with_fgn_scale(scale);
    } else if (j.contains("fgn_scale") && detail::get_number(j.at("fgn_scale"), where + ".fgn_scale") != 0.0) {
      detail::schema_error(where + ".fgn_scale", "requires H");
    }
    const double flat = detail::number_or(j, "flat_level", 0.0, where);
    if (flat < 0.0) detail::schema_error(where + ".flat_level", "must be nonnegative");
    if (flat > 0.0) m = m.with_flat(flat);
    if (j.contains("zones")) {
      const Json& zs = j.at("zones");
      if (!zs.is_array()) detail::schema_error(where + ".zones", "expected an array of [lo, hi]");
      std::vector<Zone> zones;
      for (std::size_t i = 0; i < zs.size(); ++i) {
        const std::string w = where + ".zones[" + std::to_string(i) + "]";
        if (!zs[i].is_array() || zs[i].size() != 2) detail::schema_error(w, "expected [lo, hi]");
        zones.push_back({detail::get_number(zs[i][0], w), detail::get_number(zs[i][1], w)});
      }
      if (!zones.empty()) m = m.with_zones(zones);
    }
    if (j.contains("atoms")) {
      const Json& as = j.at("atoms");
      if (!as.is_array()) detail::schema_error(where + ".atoms", "expected an array of [u, w]");
      std::vector<Atom> atoms;
      for (std::size_t i = 0; i < as.size(); ++i) {
        const std::string w = where + ".atoms[" + std::to_string(i) + "]";
        if (!as[i].is_array() || as[i].size() != 2) detail::schema_error(w, "expected [u, w]");
        atoms.push_back({detail::get_number(as[i][0], w), detail::get_number(as[i][1], w)});
      }
      if (!atoms.empty()) m = m.with_atoms(atoms);
    }
    if (j.contains("ell_family")) m = m.with_ell(ell_from_json(j.at("ell_family"), where + ".ell_family"));
    if (j.contains("label")) {
      if (!j.at("label").is_string()) detail::schema_error(where + ".label", "expected a string");
      m = m.with_label(j.at("label").get<std::string>());
    }
    if (!m.has_density() && m.atoms().empty()) detail::schema_error(where, "measure has no mass");
    m.validate();
    return m;
  } catch (const DomainError& e) {
    detail::schema_error(where, e.what());
  }
}

// ---------------------------------------------------------------------------
// Boundaries
// ---------------------------------------------------------------------------

inline Json to_json(const Boundary& b) {
  switch (b.family()) {
    case Boundary::Family::constant:
      return {{"family", "constant"}, {"f", b.scale()}};
    case Boundary::Family::power:
      return {{"family", "power"}, {"c", b.scale()}, {"gamma", b.exponent()}};
    case Boundary::Family::table:
      return {{"family", "table"}, {"values", b.values()}};
  }
  return {};
}

inline Boundary boundary_from_json(const Json& j, const std::string& where = "boundary") {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    detail::schema_error(where, "expected {\"family\": \"constant\" | \"power\" | \"table\", ...}");
  const std::string fam = j.at("family").get<std::string>();
  try {
    if (fam == "constant") {
      detail::reject_unknown_keys(j, where, {"family", "f"});
      if (!j.contains("f")) detail::schema_error(where, "constant boundary needs f");
      return Boundary::constant(detail::get_number(j.at("f"), where + ".f"));
    }
    if (fam == "power") {
      detail::reject_unknown_keys(j, where, {"family", "c", "gamma"});
      return Boundary::power(detail::number_or(j, "c", 1.0, where), detail::number_or(j, "gamma", 0.0, where));
    }
    if (fam == "table") {
      detail::reject_unknown_keys(j, where, {"family", "values"});
      if (!j.contains("values") || !j.at("values").is_array()) detail::schema_error(where, "table needs values[]");
      std::vector<double> v;
      for (std::size_t i = 0; i < j.at("values").size(); ++i)
        v.push_back(detail::get_number(j.at("values")[i], where + ".values[" + std::to_string(i) + "]"));
      return Boundary::table(std::move(v));
    }
  } catch (const DomainError& e) {
    detail::schema_error(where, e.what());
  }
  detail::schema_error(where, "unknown boundary family '" + fam + "'");
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

/// {method, N, f, log_p, p, err, seed, wall_time_ms} plus flags.
inline Json to_json(const BandProbability& b) {
  Json j;
  j["method"] = b.method;
  j["N"] = b.N;
  j["f"] = b.f;
  j["log_p"] = finite_or_null(b.log_p);
  j["p"] = b.p;
  j["err"] = finite_or_null(b.err);
  j["log_err"] = finite_or_null(b.log_err);
  j["seed"] = b.seed;
  j["samples"] = b.samples;
  j["upper_bound_only"] = b.upper_bound_only;
  j["low_count"] = b.low_count;
  j["out_of_range"] = b.out_of_range;
  j["wall_time_ms"] = b.wall_time_ms;
  return j;
}

inline Json to_json(const TransferRate& t) {
  return {{"f", t.f}, {"c", t.c}, {"lambda1", t.lambda1}, {"lambda2", t.lambda2}, {"gap_ratio", t.lambda2 / t.lambda1},
          {"nodes", t.nodes}, {"err", t.err}};
}

/// FNV-1a over the canonical dump with every "wall_time_ms" member removed,
/// so reruns with the same seed hash identically.
inline std::string payload_hash(Json j) {
  auto strip = [](auto& self, Json& node) -> void {
    if (node.is_object()) {
      node.erase("wall_time_ms");
      for (auto& item : node.items()) self(self, item.value());
    } else if (node.is_array()) {
      for (auto& v : node) self(self, v);
    }
  };
  strip(strip, j);
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace smalldev
