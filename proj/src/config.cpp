#include "tvlab/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "tvlab/fingerprint.hpp"

namespace tvlab {

namespace {

using json = nlohmann::json;

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "\n") + p;
  return out;
}

// Walks one JSON object, reading known keys and collecting "path: reason"
// errors instead of stopping at the first one.
class Reader {
 public:
  Reader(const json& node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (!node_.is_object()) fail("", "must be an object");
  }

  ~Reader() {
    if (!node_.is_object()) return;
    for (const auto& [key, value] : node_.items())
      if (!seen_.count(key)) fail(key, "unknown key");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.is_object() && node_.contains(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number()) return fail(key, "must be a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(key, "must be finite");
  }

  void positive(const std::string& key, double& out) {
    if (!has(key)) return;
    number(key, out);
    if (node_.at(key).is_number() && !(out > 0.0)) fail(key, key + " must be positive");
  }

  void integer(const std::string& key, int& out, int min) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) return fail(key, "must be an integer");
    out = v.get<int>();
    if (out < min) fail(key, "must be at least " + std::to_string(min));
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_boolean()) return fail(key, "must be true or false");
    out = v.get<bool>();
  }

  template <typename Enum, typename Parse>
  void tag(const std::string& key, Enum& out, Parse parse, const char* allowed) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_string()) return fail(key, std::string("must be one of ") + allowed);
    try {
      out = parse(v.get<std::string>());
    } catch (const std::exception&) {
      fail(key, std::string("must be one of ") + allowed);
    }
  }

  std::optional<Reader> object(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return std::optional<Reader>(std::in_place, node_.at(key), child(key), errors_);
  }

  const json* array(const std::string& key) {
    if (!has(key)) return nullptr;
    const json& v = node_.at(key);
    if (!v.is_array() || v.empty()) {
      fail(key, "must be a non-empty array");
      return nullptr;
    }
    return &v;
  }

  void fail(const std::string& key, const std::string& reason) {
    errors_.push_back((key.empty() ? (path_.empty() ? "<root>" : path_) : child(key)) + ": " + reason);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& node_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

InitialData initial_from_string(std::string_view tag) {
  if (tag == "smooth") return InitialData::Smooth;
  if (tag == "rough") return InitialData::Rough;
  throw std::invalid_argument("unknown initial data");
}

const char* to_string(InitialData d) { return d == InitialData::Smooth ? "smooth" : "rough"; }

void read_scan(Reader& r, ScanConfig& scan, std::vector<std::string>& errors) {
  if (const json* ratios = r.array("ratios")) {
    scan.ratios.clear();
    for (const auto& v : *ratios) {
      if (!v.is_number() || !(v.get<double>() > 0.0)) {
        r.fail("ratios", "entries must be positive numbers");
        break;
      }
      scan.ratios.push_back(v.get<double>());
    }
  }
  if (const json* meshes = r.array("meshes")) {
    scan.meshes.clear();
    for (const auto& v : *meshes) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer() ||
          v[0].get<int>() < 4 || v[1].get<int>() < 4) {
        r.fail("meshes", "entries must be [n, m] with integers n, m >= 4");
        break;
      }
      scan.meshes.push_back({v[0].get<int>(), v[1].get<int>()});
    }
  }
  if (const json* bcs = r.array("bcs")) {
    scan.bcs.clear();
    for (const auto& v : *bcs) {
      try {
        scan.bcs.push_back(boundary_from_string(v.is_string() ? v.get<std::string>() : ""));
      } catch (const std::exception&) {
        r.fail("bcs", "entries must be \"dirichlet\" or \"mixed\"");
        break;
      }
    }
  }
  r.tag("initial", scan.initial, initial_from_string, "\"smooth\", \"rough\"");
  r.integer("spectrum_max_n", scan.spectrum_max_n, 0);
  r.positive("unequal_ratio", scan.unequal_ratio);
  r.positive("equal_ratio", scan.equal_ratio);
  (void)errors;
}

}  // namespace

ConfigError::ConfigError(int code, std::vector<std::string> errors)
    : std::runtime_error(join(errors)), code_(code), errors_(std::move(errors)) {}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  std::vector<std::string> errors;
  {
    Reader r(doc, "", errors);
    r.positive("rho1", cfg.params.rho1);
    r.positive("rho2", cfg.params.rho2);
    r.positive("rho3", cfg.params.rho3);
    r.positive("k", cfg.params.k);
    r.positive("b", cfg.params.b);
    r.positive("delta", cfg.params.delta);
    r.positive("gamma", cfg.params.gamma);
    r.positive("sigma", cfg.params.sigma);
    r.positive("l", cfg.params.l);
    if (auto kr = r.object("kernel")) {
      kr->positive("g0", cfg.kernel.g0);
      kr->positive("a", cfg.kernel.a);
      // k1 = a unless given.
      cfg.kernel.k1 = cfg.kernel.a;
      kr->positive("k1", cfg.kernel.k1);
    }
    r.tag("bc", cfg.bc, boundary_from_string, "\"dirichlet\", \"mixed\"");
    r.tag("variant", cfg.variant, variant_from_string, "\"case1\", \"case2\"");
    if (auto gr = r.object("grids")) {
      gr->integer("n", cfg.grids.n, 4);
      gr->integer("m", cfg.grids.m, 4);
      gr->positive("tail_tol", cfg.grids.tail_tol);
      if (!(cfg.grids.tail_tol < 1.0)) gr->fail("tail_tol", "must lie in (0, 1)");
    }
    if (auto sr = r.object("scheme")) {
      sr->positive("dt", cfg.scheme.dt);
      sr->positive("t_end", cfg.scheme.t_end);
      if (!(cfg.scheme.t_end >= cfg.scheme.dt)) sr->fail("t_end", "must be at least dt");
    }
    r.tag("initial", cfg.initial, initial_from_string, "\"smooth\", \"rough\"");
    if (auto rr = r.object("resolvent")) {
      rr->positive("lambda_min", cfg.resolvent.lambda_min);
      rr->positive("lambda_max", cfg.resolvent.lambda_max);
      rr->integer("count", cfg.resolvent.count, 1);
      rr->boolean("include_zero", cfg.resolvent.include_zero);
      if (!(cfg.resolvent.lambda_min <= cfg.resolvent.lambda_max))
        rr->fail("lambda_max", "must be at least lambda_min");
    }
    if (auto sc = r.object("scan")) read_scan(*sc, cfg.scan, errors);
    if (auto ob = r.object("observability")) {
      ObservabilityOptions& o = cfg.observability;
      ob->positive("rho", o.rho);
      ob->positive("k", o.k);
      ob->positive("L", o.L);
      // Interval defaults scale with L.
      o.a1 = o.L / 4, o.a2 = o.L / 2, o.b1 = 2 * o.L / 5, o.b2 = 3 * o.L / 5;
      ob->number("a1", o.a1);
      ob->number("a2", o.a2);
      ob->number("b1", o.b1);
      ob->number("b2", o.b2);
      ob->integer("n", o.n, 4);
      ob->integer("samples", o.samples, 1);
      ob->positive("lambda_max", o.lambda_max);
      ob->integer("modes", o.modes, 1);
      if (!(0.0 <= o.a1 && o.a1 < o.a2 && o.a2 <= o.L)) ob->fail("a2", "need 0 <= a1 < a2 <= L");
      if (!(0.0 <= o.b1 && o.b1 < o.b2 && o.b2 < o.L)) ob->fail("b2", "need 0 <= b1 < b2 < L");
    }
  }
  if (!errors.empty()) throw ConfigError(kSchemaError, std::move(errors));

  const ValidationReport report = validate(cfg.params, cfg.kernel);
  if (!report.ok())
    throw ConfigError(kSchemaError, {"kernel assumption violated: " + report.failures()});
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(kIoError, {std::string("malformed JSON: ") + e.what()});
  }
  return parse_config(doc);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw ConfigError(kUsage, {path.string() + ": configuration file not found"});
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(kIoError, {path.string() + ": cannot read configuration file"});
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["rho1"] = c.params.rho1;
  j["rho2"] = c.params.rho2;
  j["rho3"] = c.params.rho3;
  j["k"] = c.params.k;
  j["b"] = c.params.b;
  j["delta"] = c.params.delta;
  j["gamma"] = c.params.gamma;
  j["sigma"] = c.params.sigma;
  j["l"] = c.params.l;
  j["kernel"] = {{"g0", c.kernel.g0}, {"a", c.kernel.a}, {"k1", c.kernel.k1}};
  j["bc"] = std::string(to_string(c.bc));
  j["variant"] = std::string(to_string(c.variant));
  j["grids"] = {{"n", c.grids.n}, {"m", c.grids.m}, {"tail_tol", c.grids.tail_tol}};
  j["scheme"] = {{"dt", c.scheme.dt}, {"t_end", c.scheme.t_end}};
  j["initial"] = to_string(c.initial);
  j["resolvent"] = {{"lambda_min", c.resolvent.lambda_min},
                    {"lambda_max", c.resolvent.lambda_max},
                    {"count", c.resolvent.count},
                    {"include_zero", c.resolvent.include_zero}};
  nlohmann::ordered_json meshes = nlohmann::ordered_json::array();
  for (const auto& m : c.scan.meshes) meshes.push_back({m.n, m.m});
  nlohmann::ordered_json bcs = nlohmann::ordered_json::array();
  for (auto bc : c.scan.bcs) bcs.push_back(std::string(to_string(bc)));
  j["scan"] = {{"ratios", c.scan.ratios},
               {"meshes", meshes},
               {"bcs", bcs},
               {"initial", to_string(c.scan.initial)},
               {"spectrum_max_n", c.scan.spectrum_max_n},
               {"unequal_ratio", c.scan.unequal_ratio},
               {"equal_ratio", c.scan.equal_ratio}};
  const auto& o = c.observability;
  j["observability"] = {{"rho", o.rho},         {"k", o.k},     {"L", o.L},     {"n", o.n},
                        {"a1", o.a1},           {"a2", o.a2},   {"b1", o.b1},   {"b2", o.b2},
                        {"samples", o.samples}, {"lambda_max", o.lambda_max}, {"modes", o.modes}};
  return j;
}

std::string config_fingerprint(const RunConfig& config) {
  return hex_digest(fnv1a(to_json(config).dump()));
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["fingerprint"] = manifest.fingerprint;
  j["tool_version"] = manifest.tool_version;
  j["seed"] = manifest.seed;
  j["wall_time_s"] = manifest.wall_time_s;
  j["files"] = manifest.files;
  j["config"] = manifest.config;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << '\n';
}

}  // namespace tvlab
