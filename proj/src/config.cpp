#include "ddlab/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ddlab/error.hpp"

namespace ddlab {

using nlohmann::json;

namespace {

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string ptr(const std::string& key) { return "/" + key; }

const char* type_name(const json& v) { return v.type_name(); }

std::int64_t get_int(const json& v, const std::string& path, std::int64_t min_value) {
  if (!v.is_number_integer())
    throw ConfigError(std::string("expected an integer, got ") + type_name(v), path);
  std::int64_t out;
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      throw ConfigError("integer out of range", path);
    out = static_cast<std::int64_t>(u);
  } else {
    out = v.get<std::int64_t>();
  }
  if (out < min_value) throw ConfigError("must be >= " + std::to_string(min_value), path);
  return out;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(std::string("expected a number, got ") + type_name(v), path);
  return v.get<double>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(std::string("expected a string, got ") + type_name(v), path);
  return v.get<std::string>();
}

template <class Enum>
Enum get_enum(const json& v, const std::string& path,
              const std::vector<std::pair<std::string, Enum>>& options) {
  const std::string s = get_string(v, path);
  std::string valid;
  for (const auto& [name, value] : options) {
    if (name == s) return value;
    valid += (valid.empty() ? "" : ", ") + name;
  }
  throw ConfigError("unknown value '" + s + "' (valid: " + valid + ")", path);
}

double parse_gamma_value(const std::string& text, const std::string& path) {
  std::size_t used = 0;
  double g;
  try {
    g = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse gamma '" + text + "'", path);
  }
  if (used != text.size()) throw ConfigError("cannot parse gamma '" + text + "'", path);
  if (!(g > 0.0 && g <= 1.0)) throw ConfigError("gamma " + text + " is outside (0,1]", path);
  return g;
}

std::string format_gamma(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", g);
  return buf;
}

void apply_override(json& doc, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + item + "' must look like key=value", "");
  const std::string key = item.substr(0, eq);
  const std::string text = item.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  doc[key] = value;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "sweep",  "grid",      "n",         "p",           "d",           "D",
      "sigma2", "b2",        "estimator", "lambda",      "gamma_policy", "trials",
      "seed",   "report",    "axis",      "target",      "test_size",   "train_images",
      "train_labels", "test_images", "test_labels"};
  return keys;
}

std::string closest_key(const std::string& unknown) {
  std::string best;
  std::size_t best_prefix = std::numeric_limits<std::size_t>::max();
  std::size_t best_full = best_prefix;
  for (const std::string& key : config_keys()) {
    std::size_t prefix = std::numeric_limits<std::size_t>::max();
    for (std::size_t len = 1; len <= key.size(); ++len)
      prefix = std::min(prefix, levenshtein(unknown, key.substr(0, len)));
    const std::size_t full = levenshtein(unknown, key);
    if (prefix < best_prefix || (prefix == best_prefix && full < best_full)) {
      best = key;
      best_prefix = prefix;
      best_full = full;
    }
  }
  return best;
}

GammaPolicy parse_gamma_policy(const std::string& text, const std::string& path) {
  if (text == "optimal" || text == "optimal_per_point") return GammaPolicy::optimal();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (colon != std::string::npos && head == "fixed")
    return GammaPolicy::fixed(parse_gamma_value(text.substr(colon + 1), path));
  if (colon != std::string::npos && head == "sweep") {
    std::vector<double> values;
    std::stringstream ss(text.substr(colon + 1));
    std::string part;
    while (std::getline(ss, part, ',')) values.push_back(parse_gamma_value(part, path));
    if (values.empty()) throw ConfigError("sweep policy needs at least one gamma", path);
    return GammaPolicy::sweep(std::move(values));
  }
  throw ConfigError("gamma_policy must be 'optimal', 'fixed:<g>' or 'sweep:<g1>,<g2>,...', got '" +
                        text + "'",
                    path);
}

std::string gamma_policy_text(const GammaPolicy& policy) {
  switch (policy.kind) {
    case GammaPolicy::Kind::OptimalPerPoint: return "optimal";
    case GammaPolicy::Kind::Fixed: return "fixed:" + format_gamma(policy.values.at(0));
    case GammaPolicy::Kind::Sweep: {
      std::string s = "sweep:";
      for (std::size_t i = 0; i < policy.values.size(); ++i)
        s += (i ? "," : "") + format_gamma(policy.values[i]);
      return s;
    }
  }
  return "";
}

SweepConfig parse_config_json(json doc, const std::vector<std::string>& overrides) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", "");
  for (const std::string& item : overrides) apply_override(doc, item);

  const auto& keys = config_keys();
  for (const auto& [key, value] : doc.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown field '" + key + "'; did you mean '" + closest_key(key) + "'?",
                        ptr(key));
  }

  SweepConfig cfg;
  cfg.fixed.sigma2 = 0.25;
  cfg.fixed.b2 = 1.0;

  if (!doc.contains("sweep")) throw ConfigError("missing required field", "/sweep");
  cfg.kind = get_enum<SweepKind>(doc["sweep"], "/sweep",
                                 {{"samples", SweepKind::Samples},
                                  {"model", SweepKind::Model},
                                  {"features", SweepKind::Features},
                                  {"spectrum", SweepKind::Spectrum}});

  if (!doc.contains("grid")) throw ConfigError("missing required field", "/grid");
  const json& grid = doc["grid"];
  if (!grid.is_array()) throw ConfigError(std::string("expected an array, got ") + type_name(grid), "/grid");
  if (grid.empty()) throw ConfigError("grid must not be empty", "/grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::string path = "/grid/" + std::to_string(i);
    cfg.grid.push_back(get_int(grid[i], path, 1));
    if (i > 0 && cfg.grid[i] <= cfg.grid[i - 1])
      throw ConfigError("grid must be strictly increasing", path);
  }

  auto has = [&](const char* k) { return doc.contains(k); };
  if (has("n")) cfg.fixed.n = get_int(doc["n"], "/n", 1);
  if (has("p")) cfg.fixed.p = get_int(doc["p"], "/p", 1);
  if (has("d")) cfg.features.input_dim = get_int(doc["d"], "/d", 1);
  if (has("D")) cfg.features.features = get_int(doc["D"], "/D", 1);
  if (has("sigma2")) {
    cfg.fixed.sigma2 = get_number(doc["sigma2"], "/sigma2");
    if (!(cfg.fixed.sigma2 >= 0.0)) throw ConfigError("must be >= 0", "/sigma2");
  }
  if (has("b2")) {
    cfg.fixed.b2 = get_number(doc["b2"], "/b2");
    if (!(cfg.fixed.b2 >= 0.0)) throw ConfigError("must be >= 0", "/b2");
  }
  if (has("estimator"))
    cfg.estimator = get_enum<EstimatorKind>(doc["estimator"], "/estimator",
                                            {{"ols", EstimatorKind::Ols},
                                             {"ridge", EstimatorKind::Ridge},
                                             {"dropout_scalar", EstimatorKind::DropoutScalar},
                                             {"dropout_diagonal", EstimatorKind::DropoutDiagonal},
                                             {"dropout_spectral", EstimatorKind::DropoutSpectral}});
  if (has("lambda")) {
    cfg.lambda = get_number(doc["lambda"], "/lambda");
    if (!(cfg.lambda >= 0.0)) throw ConfigError("must be >= 0", "/lambda");
  }
  if (has("gamma_policy")) {
    const json& g = doc["gamma_policy"];
    if (g.is_number()) cfg.gamma_policy = GammaPolicy::fixed(parse_gamma_value(g.dump(), "/gamma_policy"));
    else cfg.gamma_policy = parse_gamma_policy(get_string(g, "/gamma_policy"));
  }
  if (has("trials")) cfg.trials = get_int(doc["trials"], "/trials", 1);
  if (has("seed")) {
    const json& s = doc["seed"];
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ConfigError(std::string("expected a non-negative integer, got ") + type_name(s), "/seed");
    cfg.master_seed = s.get<std::uint64_t>();
  }
  if (has("report"))
    cfg.report = get_enum<ReportKind>(doc["report"], "/report",
                                      {{"excess", ReportKind::Excess},
                                       {"total", ReportKind::Total},
                                       {"both", ReportKind::Both}});
  if (has("axis"))
    cfg.features.axis = get_enum<FeatureAxis>(
        doc["axis"], "/axis", {{"n", FeatureAxis::SampleSize}, {"D", FeatureAxis::FeatureCount}});
  if (has("target"))
    cfg.features.target = get_enum<FeatureTarget>(doc["target"], "/target",
                                                  {{"linear_input", FeatureTarget::LinearInput},
                                                   {"linear_features", FeatureTarget::LinearFeatures}});
  if (has("test_size")) cfg.features.test_size = get_int(doc["test_size"], "/test_size", 1);
  if (has("train_images")) cfg.features.train_images = get_string(doc["train_images"], "/train_images");
  if (has("train_labels")) cfg.features.train_labels = get_string(doc["train_labels"], "/train_labels");
  if (has("test_images")) cfg.features.test_images = get_string(doc["test_images"], "/test_images");
  if (has("test_labels")) cfg.features.test_labels = get_string(doc["test_labels"], "/test_labels");

  switch (cfg.kind) {
    case SweepKind::Samples:
    case SweepKind::Spectrum:
      if (cfg.fixed.p < 1) throw ConfigError("missing required field", "/p");
      break;
    case SweepKind::Model:
      if (cfg.fixed.p < 1) throw ConfigError("missing required field", "/p");
      if (cfg.fixed.n < 1) throw ConfigError("missing required field", "/n");
      for (std::size_t i = 0; i < cfg.grid.size(); ++i)
        if (cfg.grid[i] > cfg.fixed.p)
          throw ConfigError("model size exceeds p = " + std::to_string(cfg.fixed.p),
                            "/grid/" + std::to_string(i));
      break;
    case SweepKind::Features:
      if (cfg.features.axis == FeatureAxis::FeatureCount && cfg.fixed.n < 1)
        throw ConfigError("missing required field (sample size for a sweep along D)", "/n");
      break;
  }
  return cfg;
}

SweepConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'", "");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("'" + path.string() + "' is not valid JSON", "");
  return parse_config_json(std::move(doc), overrides);
}

json config_to_json(const SweepConfig& cfg) {
  json j;
  j["sweep"] = sweep_kind_name(cfg.kind);
  j["grid"] = cfg.grid;
  if (cfg.fixed.n > 0) j["n"] = cfg.fixed.n;
  if (cfg.fixed.p > 0) j["p"] = cfg.fixed.p;
  j["sigma2"] = cfg.fixed.sigma2;
  j["b2"] = cfg.fixed.b2;
  j["estimator"] = estimator_kind_name(cfg.estimator);
  j["lambda"] = cfg.lambda;
  j["gamma_policy"] = gamma_policy_text(cfg.gamma_policy);
  j["trials"] = cfg.trials;
  j["seed"] = cfg.master_seed;
  j["report"] = cfg.report == ReportKind::Excess ? "excess"
                : cfg.report == ReportKind::Total ? "total"
                                                  : "both";
  if (cfg.kind == SweepKind::Features) {
    const FeatureSweepOptions& f = cfg.features;
    j["d"] = f.input_dim;
    j["D"] = f.features;
    j["axis"] = f.axis == FeatureAxis::SampleSize ? "n" : "D";
    j["target"] = f.target == FeatureTarget::LinearInput ? "linear_input" : "linear_features";
    j["test_size"] = f.test_size;
    if (f.uses_idx()) {
      j["train_images"] = f.train_images;
      j["train_labels"] = f.train_labels;
      j["test_images"] = f.test_images;
      j["test_labels"] = f.test_labels;
    }
  }
  return j;
}

}  // namespace ddlab
