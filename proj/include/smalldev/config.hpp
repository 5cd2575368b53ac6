#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "smalldev/io.hpp"

namespace smalldev {

struct QmcEngineConfig {
  bool enabled = true;
  std::size_t samples = 8192;
  std::size_t randomizations = 16;
  PointSet points = PointSet::lattice;
};

struct McEngineConfig {
  bool enabled = true;
  std::size_t samples = 100000;
};

struct TransferEngineConfig {
  bool enabled = true;
  std::size_t nodes = 200;
};

struct AtomicEngineConfig {
  bool enabled = true;
};

struct EngineConfig {
  QmcEngineConfig qmc;
  McEngineConfig mc;
  TransferEngineConfig transfer;
  AtomicEngineConfig atomic;
};

struct OutputConfig {
  std::string dir = "out";
  std::string prefix = "run";
};

enum class SampleFormat { sdlb1, csv };

struct SampleConfig {
  std::size_t count = 1000;
  SampleFormat format = SampleFormat::sdlb1;
};

struct ValidateConfig {
  std::size_t seeds = 5;
};

struct ExperimentConfig {
  SpectralMeasure measure = SpectralMeasure::white_noise();
  Boundary boundary = Boundary::constant(1.0);
  std::size_t N = 16;
  EngineConfig engines;
  std::uint64_t seed = 1;
  OutputConfig output;
  SampleConfig sample;
  ValidateConfig validate;

  void check() const {
    if (N < 1) throw ConfigError("schema error at N: must be at least 1");
    if (N > 4096) throw ConfigError("schema error at N: above the supported horizon 4096");
    if (engines.qmc.samples == 0 || engines.qmc.randomizations < 2)
      throw ConfigError("schema error at engines.qmc: need samples >= 1 and randomizations >= 2");
    if (engines.mc.samples == 0) throw ConfigError("schema error at engines.mc.samples: must be positive");
    if (engines.transfer.nodes < 8) throw ConfigError("schema error at engines.transfer.nodes: need at least 8");
    if (sample.count == 0) throw ConfigError("schema error at sample.count: must be positive");
    if (validate.seeds == 0) throw ConfigError("schema error at validate.seeds: must be positive");
    if (output.prefix.empty()) throw ConfigError("schema error at output.prefix: must be nonempty");
    for (std::size_t n = 1; n <= N; ++n)
      if (!(boundary(n) > 0.0)) throw ConfigError("schema error at boundary: f_N must be positive");
  }
};

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["measure"] = to_json(c.measure);
  j["boundary"] = to_json(c.boundary);
  j["N"] = c.N;
  j["engines"] = {
      {"qmc",
       {{"enabled", c.engines.qmc.enabled},
        {"samples", c.engines.qmc.samples},
        {"randomizations", c.engines.qmc.randomizations},
        {"points", c.engines.qmc.points == PointSet::lattice ? "lattice" : "pseudo"}}},
      {"mc", {{"enabled", c.engines.mc.enabled}, {"samples", c.engines.mc.samples}}},
      {"transfer", {{"enabled", c.engines.transfer.enabled}, {"nodes", c.engines.transfer.nodes}}},
      {"atomic", {{"enabled", c.engines.atomic.enabled}}}};
  j["seed"] = c.seed;
  j["output"] = {{"dir", c.output.dir}, {"prefix", c.output.prefix}};
  j["sample"] = {{"count", c.sample.count}, {"format", c.sample.format == SampleFormat::sdlb1 ? "sdlb1" : "csv"}};
  j["validate"] = {{"seeds", c.validate.seeds}};
  return j;
}

namespace detail {

inline bool get_bool(const Json& j, const std::string& where) {
  if (!j.is_boolean()) schema_error(where, "expected true or false");
  return j.get<bool>();
}

inline std::string get_string(const Json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where, "expected a string");
  return j.get<std::string>();
}

}  // namespace detail

/// Missing members keep their defaults; unknown members are rejected.
inline ExperimentConfig config_from_json(const Json& j) {
  using namespace detail;
  reject_unknown_keys(j, "config", {"measure", "boundary", "N", "engines", "seed", "output", "sample", "validate"});
  ExperimentConfig c;
  if (j.contains("measure")) c.measure = measure_from_json(j.at("measure"));
  if (j.contains("boundary")) c.boundary = boundary_from_json(j.at("boundary"));
  if (j.contains("N")) c.N = get_u64(j.at("N"), "N");
  if (j.contains("seed")) c.seed = get_u64(j.at("seed"), "seed");
  if (j.contains("engines")) {
    const Json& e = j.at("engines");
    reject_unknown_keys(e, "engines", {"qmc", "mc", "transfer", "atomic"});
    if (e.contains("qmc")) {
      const Json& q = e.at("qmc");
      reject_unknown_keys(q, "engines.qmc", {"enabled", "samples", "randomizations", "points"});
      if (q.contains("enabled")) c.engines.qmc.enabled = get_bool(q.at("enabled"), "engines.qmc.enabled");
      if (q.contains("samples")) c.engines.qmc.samples = get_u64(q.at("samples"), "engines.qmc.samples");
      if (q.contains("randomizations"))
        c.engines.qmc.randomizations = get_u64(q.at("randomizations"), "engines.qmc.randomizations");
      if (q.contains("points")) {
        const std::string p = get_string(q.at("points"), "engines.qmc.points");
        if (p == "lattice")
          c.engines.qmc.points = PointSet::lattice;
        else if (p == "pseudo")
          c.engines.qmc.points = PointSet::pseudo;
        else
          schema_error("engines.qmc.points", "expected \"lattice\" or \"pseudo\"");
      }
    }
    if (e.contains("mc")) {
      const Json& m = e.at("mc");
      reject_unknown_keys(m, "engines.mc", {"enabled", "samples"});
      if (m.contains("enabled")) c.engines.mc.enabled = get_bool(m.at("enabled"), "engines.mc.enabled");
      if (m.contains("samples")) c.engines.mc.samples = get_u64(m.at("samples"), "engines.mc.samples");
    }
    if (e.contains("transfer")) {
      const Json& t = e.at("transfer");
      reject_unknown_keys(t, "engines.transfer", {"enabled", "nodes"});
      if (t.contains("enabled")) c.engines.transfer.enabled = get_bool(t.at("enabled"), "engines.transfer.enabled");
      if (t.contains("nodes")) c.engines.transfer.nodes = get_u64(t.at("nodes"), "engines.transfer.nodes");
    }
    if (e.contains("atomic")) {
      const Json& a = e.at("atomic");
      reject_unknown_keys(a, "engines.atomic", {"enabled"});
      if (a.contains("enabled")) c.engines.atomic.enabled = get_bool(a.at("enabled"), "engines.atomic.enabled");
    }
  }
  if (j.contains("output")) {
    const Json& o = j.at("output");
    reject_unknown_keys(o, "output", {"dir", "prefix"});
    if (o.contains("dir")) c.output.dir = get_string(o.at("dir"), "output.dir");
    if (o.contains("prefix")) c.output.prefix = get_string(o.at("prefix"), "output.prefix");
  }
  if (j.contains("sample")) {
    const Json& s = j.at("sample");
    reject_unknown_keys(s, "sample", {"count", "format"});
    if (s.contains("count")) c.sample.count = get_u64(s.at("count"), "sample.count");
    if (s.contains("format")) {
      const std::string f = get_string(s.at("format"), "sample.format");
      if (f == "sdlb1")
        c.sample.format = SampleFormat::sdlb1;
      else if (f == "csv")
        c.sample.format = SampleFormat::csv;
      else
        schema_error("sample.format", "expected \"sdlb1\" or \"csv\"");
    }
  }
  if (j.contains("validate")) {
    const Json& v = j.at("validate");
    reject_unknown_keys(v, "validate", {"seeds"});
    if (v.contains("seeds")) c.validate.seeds = get_u64(v.at("seeds"), "validate.seeds");
  }
  c.check();
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("schema error: malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace smalldev
