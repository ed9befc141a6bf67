#include "fsde/cli/config.hpp"

#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "fsde/errors.hpp"

namespace fsde::cli {

using nlohmann::json;

namespace {

// A JSON object with a pointer prefix; every key must be consumed or listed.
class Section {
 public:
  Section(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) throw ConfigError(ptr_.empty() ? "/" : ptr_, "expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError(ptr_ + "/" + k, "unknown key");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const {
    if (!j_.contains(key)) throw ConfigError(ptr_ + "/" + key, "missing required key");
    return j_.at(key);
  }
  std::string path(const char* key) const { return ptr_ + "/" + key; }
  Section sub(const char* key) const { return Section(raw(key), path(key)); }

  double number(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path(key), "must be finite");
    return d;
  }
  double number(const char* key, double lo, double hi, bool lo_open, bool hi_open) const {
    const double d = number(key);
    const bool ok_lo = lo_open ? d > lo : d >= lo;
    const bool ok_hi = hi_open ? d < hi : d <= hi;
    if (!ok_lo || !ok_hi)
      throw ConfigError(path(key), "value " + std::to_string(d) + " outside " + (lo_open ? "(" : "[") +
                                       std::to_string(lo) + ", " + std::to_string(hi) + (hi_open ? ")" : "]"));
    return d;
  }
  std::uint64_t unsigned_int(const char* key, std::uint64_t lo = 0) const {
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(path(key), "expected a non-negative integer");
    const auto u = v.get<std::uint64_t>();
    if (u < lo) throw ConfigError(path(key), "must be at least " + std::to_string(lo));
    return u;
  }
  std::string string(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(path(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string ptr_;
};

constexpr double inf = std::numeric_limits<double>::infinity();

PotentialConfig parse_potential(const Section& s) {
  s.allow_only({"kind", "params"});
  const auto kind = s.string("kind");
  PotentialConfig p;
  if (kind == "zero") {
    p.kind = Potential::Kind::zero;
    if (s.has("params")) s.sub("params").allow_only({});
  } else if (kind == "linear") {
    p.kind = Potential::Kind::linear;
    const auto q = s.sub("params");
    q.allow_only({"k"});
    p.k = q.number("k", 0.0, inf, true, true);
  } else if (kind == "clipped_double_well") {
    p.kind = Potential::Kind::clipped_double_well;
    const auto q = s.sub("params");
    q.allow_only({"a", "b", "clip_radius"});
    p.a = q.number("a", 0.0, inf, true, true);
    p.b = q.number("b", 0.0, inf, false, true);
    p.clip_radius = q.number("clip_radius", 0.0, inf, true, true);
  } else {
    throw ConfigError(s.path("kind"), "unknown potential '" + kind + "' (zero, linear, clipped_double_well)");
  }
  return p;
}

}  // namespace

Potential PotentialConfig::build() const {
  switch (kind) {
    case Potential::Kind::zero: return Potential::zero();
    case Potential::Kind::linear: return Potential::linear(k);
    case Potential::Kind::clipped_double_well: return Potential::clipped_double_well(a, b, clip_radius);
  }
  return Potential::zero();
}

ModelSpec RunConfig::model() const {
  return ModelSpec(alpha, hurst, potential.build(),
                   x0_sd > 0.0 ? InitialLaw::gaussian(x0, x0_sd) : InitialLaw::point(x0));
}

std::string RunConfig::model_json() const {
  json p;
  switch (potential.kind) {
    case Potential::Kind::zero: p = {{"kind", "zero"}}; break;
    case Potential::Kind::linear: p = {{"kind", "linear"}, {"params", {{"k", potential.k}}}}; break;
    case Potential::Kind::clipped_double_well:
      p = {{"kind", "clipped_double_well"},
           {"params", {{"a", potential.a}, {"b", potential.b}, {"clip_radius", potential.clip_radius}}}};
      break;
  }
  json m{{"alpha", alpha}, {"hurst", hurst}, {"potential", p}};
  m["x0"] = x0_sd > 0.0 ? json{{"mean", x0}, {"sd", x0_sd}} : json(x0);
  return m.dump();
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  const Section top(root, "");
  top.allow_only({"schema_version", "model", "grid", "ensemble", "method", "outputs", "fbm", "embedding", "ml",
                  "spectrum", "verify"});
  RunConfig c;
  c.schema_version = static_cast<int>(top.unsigned_int("schema_version"));
  if (c.schema_version != config_schema_version)
    throw ConfigError("/schema_version", "unsupported schema version " + std::to_string(c.schema_version) +
                                             " (expected " + std::to_string(config_schema_version) + ")");

  const auto model = top.sub("model");
  model.allow_only({"alpha", "hurst", "potential", "x0"});
  c.hurst = model.number("hurst", 0.5, 1.0, true, true);
  if (model.raw("alpha").is_string()) {
    if (model.string("alpha") != "fdt") throw ConfigError("/model/alpha", "expected a number or \"fdt\"");
    c.alpha = 2.0 - 2.0 * c.hurst;
    c.alpha_is_fdt = true;
  } else {
    c.alpha = model.number("alpha");
    if (!(c.alpha > 1.0 - c.hurst && c.alpha < 1.0))
      throw ConfigError("/model/alpha", "alpha=" + std::to_string(c.alpha) + " must lie in (1-H, 1) = (" +
                                            std::to_string(1.0 - c.hurst) + ", 1)");
  }
  c.potential = parse_potential(model.sub("potential"));
  if (model.raw("x0").is_object()) {
    const auto x = model.sub("x0");
    x.allow_only({"mean", "sd"});
    c.x0 = x.number("mean");
    c.x0_sd = x.number("sd", 0.0, inf, false, true);
  } else {
    c.x0 = model.number("x0");
  }

  const auto grid = top.sub("grid");
  grid.allow_only({"dt", "n_steps"});
  c.dt = grid.number("dt", 0.0, inf, true, true);
  c.n_steps = grid.unsigned_int("n_steps", 1);

  const auto ens = top.sub("ensemble");
  ens.allow_only({"n_paths", "seed", "keep_paths"});
  c.n_paths = ens.unsigned_int("n_paths", 2);
  c.seed = ens.unsigned_int("seed");
  if (ens.has("keep_paths")) c.keep_paths = ens.unsigned_int("keep_paths");

  if (top.has("method")) {
    try {
      c.method = method_from_string(top.string("method"));
    } catch (const DomainError& e) {
      throw ConfigError("/method", e.what());
    }
  }
  if (c.method == Method::exact_linear && c.potential.kind != Potential::Kind::linear)
    throw ConfigError("/method", "exact-linear needs a linear potential");

  if (top.has("outputs")) {
    const auto o = top.sub("outputs");
    o.allow_only({"dir", "prefix"});
    if (o.has("dir")) c.out_dir = o.string("dir");
    if (o.has("prefix")) c.prefix = o.string("prefix");
    if (c.prefix.empty() || c.prefix.find('/') != std::string::npos)
      throw ConfigError("/outputs/prefix", "prefix must be a non-empty file name stem");
  }
  if (top.has("fbm")) {
    const auto f = top.sub("fbm");
    f.allow_only({"generator"});
    c.fbm_generator = f.string("generator");
    if (c.fbm_generator != "circulant" && c.fbm_generator != "exact")
      throw ConfigError("/fbm/generator", "expected \"circulant\" or \"exact\"");
  }
  if (top.has("embedding")) {
    const auto e = top.sub("embedding");
    e.allow_only({"modes", "t_min", "t_max", "masses"});
    if (e.has("modes")) c.embedding.modes = static_cast<int>(e.unsigned_int("modes", 2));
    if (e.has("t_min")) c.embedding.t_min = e.number("t_min", 0.0, inf, true, true);
    if (e.has("t_max")) c.embedding.t_max = e.number("t_max", 0.0, inf, true, true);
    if (!(c.embedding.t_max > c.embedding.t_min)) throw ConfigError("/embedding/t_max", "must exceed t_min");
    if (e.has("masses")) {
      c.embedding.masses = e.numbers("masses");
      for (std::size_t i = 0; i < c.embedding.masses.size(); ++i)
        if (!(c.embedding.masses[i] > 0.0))
          throw ConfigError("/embedding/masses/" + std::to_string(i), "mass must be positive");
    }
  }
  if (top.has("ml")) {
    const auto m = top.sub("ml");
    m.allow_only({"alpha", "beta", "z"});
    c.ml.alpha = m.number("alpha", 0.0, 1.0, true, false);
    if (m.has("beta")) c.ml.beta = m.number("beta");
    if (c.ml.beta != 1.0 && c.ml.beta != c.ml.alpha) throw ConfigError("/ml/beta", "beta must be 1 or alpha");
    c.ml.z = m.numbers("z");
  }
  if (top.has("spectrum")) {
    const auto s = top.sub("spectrum");
    s.allow_only({"omega_max", "points"});
    if (s.has("omega_max")) c.spectrum.omega_max = s.number("omega_max", 0.0, inf, true, true);
    if (s.has("points")) c.spectrum.points = s.unsigned_int("points", 2);
  }
  if (top.has("verify")) {
    const auto v = top.sub("verify");
    v.allow_only({"t_lo", "t_hi", "lags"});
    if (v.has("t_lo")) c.verify.t_lo = v.number("t_lo", 0.0, inf, true, true);
    if (v.has("t_hi")) c.verify.t_hi = v.number("t_hi", 0.0, inf, true, true);
    if (c.verify.t_lo && c.verify.t_hi && !(*c.verify.t_hi > *c.verify.t_lo))
      throw ConfigError("/verify/t_hi", "must exceed t_lo");
    if (v.has("lags")) {
      c.verify.lags = v.numbers("lags");
      for (std::size_t i = 0; i < c.verify.lags.size(); ++i)
        if (!(c.verify.lags[i] >= 0.0)) throw ConfigError("/verify/lags/" + std::to_string(i), "must be >= 0");
    }
  }
  return c;
}

}  // namespace fsde::cli
