#include "meglm/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "meglm/errors.hpp"

namespace meglm {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    const auto mark = node.Mark();
    std::string where = source_;
    if (mark.line >= 0) where += ":" + std::to_string(mark.line + 1);
    throw InputError(where + ": " + what);
  }

  void allow(const YAML::Node& map, const std::string& section, std::set<std::string> keys) const {
    if (!map.IsMap()) fail(map, "'" + section + "' must be a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, "unknown key '" + key + "' in section '" + section + "'");
    }
  }

  std::string string(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, "'" + field + "' must be a string");
    return node.as<std::string>();
  }

  double number(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, "'" + field + "' must be a number");
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + field + "' must be a number");
    }
  }

  std::vector<std::string> strings(const YAML::Node& node, const std::string& field) const {
    if (node.IsScalar()) return {node.as<std::string>()};
    if (!node.IsSequence()) fail(node, "'" + field + "' must be a list of column names");
    std::vector<std::string> out;
    for (const auto& item : node) out.push_back(string(item, field));
    return out;
  }

  PriorSpec prior(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap() || node.size() != 1)
      fail(node, "prior '" + field + "' must be one of {gaussian: [mean, precision]}, {gamma: [shape, rate]}, "
                 "{fixed: value}, flat");
    const auto kind = node.begin()->first.as<std::string>();
    const YAML::Node args = node.begin()->second;
    auto pair = [&]() -> std::pair<double, double> {
      if (!args.IsSequence() || args.size() != 2) fail(args, "prior '" + field + "' needs two parameters");
      return {number(args[0], field), number(args[1], field)};
    };
    try {
      if (kind == "gaussian") {
        const auto [m, p] = pair();
        return PriorSpec::gaussian(m, p);
      }
      if (kind == "gamma") {
        const auto [a, b] = pair();
        return PriorSpec::gamma(a, b);
      }
      if (kind == "fixed") return PriorSpec::fixed(number(args, field));
    } catch (const std::invalid_argument& e) {
      fail(node, "prior '" + field + "': " + e.what());
    }
    fail(node, "prior '" + field + "' has unknown kind '" + kind + "'");
  }

  PriorSpec prior_or_flat(const YAML::Node& node, const std::string& field) const {
    if (node.IsScalar() && node.as<std::string>() == "flat") return PriorSpec::flat();
    return prior(node, field);
  }

 private:
  std::string source_;
};

Family parse_family(const Reader& r, const YAML::Node& node) {
  const auto f = r.string(node, "family");
  if (f == "gaussian") return Family::Gaussian;
  if (f == "binomial" || f == "bernoulli") return Family::Binomial;
  if (f == "poisson") return Family::Poisson;
  r.fail(node, "unknown family '" + f + "' (expected gaussian, binomial or poisson)");
}

}  // namespace

ModelSpec parse_model_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw InputError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  const Reader r(source);
  if (!root.IsMap()) throw InputError(source + ": configuration must be a mapping");
  r.allow(root, "top level", {"model", "error", "exposure", "priors", "copy_precision", "center"});

  ModelSpec spec;
  if (!root["model"]) r.fail(root, "missing section 'model'");
  if (!root["error"]) r.fail(root, "missing section 'error'");

  const auto model = root["model"];
  r.allow(model, "model", {"family", "response", "covariates", "trials", "trials_column", "random_effect"});
  auto& obs = spec.observation;
  if (!model["family"]) r.fail(model, "model.family is required");
  obs.family = parse_family(r, model["family"]);
  if (model["response"]) obs.response = r.string(model["response"], "response");
  if (model["covariates"]) obs.covariates = r.strings(model["covariates"], "covariates");
  if (model["trials"]) {
    const double t = r.number(model["trials"], "trials");
    if (t < 1 || t != static_cast<int>(t)) r.fail(model["trials"], "trials must be a positive integer");
    obs.trials = static_cast<int>(t);
  }
  if (model["trials_column"]) obs.trials_column = r.string(model["trials_column"], "trials_column");
  if (model["random_effect"]) {
    const auto re = model["random_effect"];
    r.allow(re, "random_effect", {"precision"});
    RandomEffect effect;
    if (re["precision"]) effect.precision = r.prior(re["precision"], "random_effect.precision");
    obs.random_effect = effect;
  }

  const auto error = root["error"];
  r.allow(error, "error", {"kind", "proxies", "weights", "group", "precision"});
  if (!error["kind"]) r.fail(error, "error.kind is required");
  const auto kind = r.string(error["kind"], "kind");
  if (kind == "classical") {
    spec.error.kind = ErrorKind::Classical;
  } else if (kind == "berkson") {
    spec.error.kind = ErrorKind::Berkson;
  } else {
    r.fail(error["kind"], "unknown error kind '" + kind + "' (expected classical or berkson)");
  }
  if (error["proxies"]) spec.error.proxies = r.strings(error["proxies"], "proxies");
  if (error["weights"]) spec.error.weights = r.string(error["weights"], "weights");
  if (error["group"]) spec.error.group = r.string(error["group"], "group");
  if (error["precision"]) spec.error.precision = r.prior(error["precision"], "error.precision");

  if (const auto ex = root["exposure"]) {
    r.allow(ex, "exposure", {"covariates", "intercept", "coefficients", "precision"});
    ExposureModel e;
    if (ex["covariates"]) e.covariates = r.strings(ex["covariates"], "exposure.covariates");
    if (ex["intercept"]) e.intercept = r.prior_or_flat(ex["intercept"], "exposure.intercept");
    if (ex["coefficients"]) e.coefficients = r.prior_or_flat(ex["coefficients"], "exposure.coefficients");
    if (ex["precision"]) e.precision = r.prior(ex["precision"], "exposure.precision");
    spec.exposure = e;
  }

  if (const auto pr = root["priors"]) {
    r.allow(pr, "priors", {"intercept", "coefficients", "beta_x", "residual_precision"});
    if (pr["intercept"]) obs.intercept = r.prior_or_flat(pr["intercept"], "intercept");
    if (pr["coefficients"]) obs.coefficients = r.prior_or_flat(pr["coefficients"], "coefficients");
    if (pr["beta_x"]) spec.beta_x = r.prior_or_flat(pr["beta_x"], "beta_x");
    if (pr["residual_precision"]) obs.residual_precision = r.prior(pr["residual_precision"], "residual_precision");
  }

  if (const auto cp = root["copy_precision"]) {
    if (cp.IsScalar() && (cp.as<std::string>() == "none" || cp.as<std::string>() == "null" || cp.as<std::string>() == "~")) {
      spec.copy_precision.reset();
    } else {
      spec.copy_precision = r.number(cp, "copy_precision");
    }
  }
  if (const auto c = root["center"]) {
    try {
      spec.center = c.as<bool>();
    } catch (const YAML::Exception&) {
      r.fail(c, "'center' must be true or false");
    }
  }

  try {
    spec.validate();
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
  return spec;
}

ModelSpec load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_config(ss.str(), path);
}

PriorSpec parse_prior(const std::string& text) {
  YAML::Node node;
  try {
    node = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw InputError("prior: " + e.msg);
  }
  return Reader("<prior>").prior_or_flat(node, "prior");
}

namespace {

// Shortest round-trip text, emitted as a plain scalar.
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit_prior(YAML::Emitter& out, const PriorSpec& p) {
  out << YAML::Flow << YAML::BeginMap;
  if (p.is_fixed()) {
    out << YAML::Key << "fixed" << YAML::Value << num(p.as_fixed().value);
  } else if (p.is_gamma()) {
    out << YAML::Key << "gamma" << YAML::Value << YAML::Flow << YAML::BeginSeq << num(p.as_gamma().shape)
        << num(p.as_gamma().rate) << YAML::EndSeq;
  } else {
    out << YAML::Key << "gaussian" << YAML::Value << YAML::Flow << YAML::BeginSeq << num(p.as_gaussian().mean)
        << num(p.as_gaussian().precision) << YAML::EndSeq;
  }
  out << YAML::EndMap;
}

void emit_names(YAML::Emitter& out, const std::vector<std::string>& names) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& n : names) out << n;
  out << YAML::EndSeq;
}

}  // namespace

std::string model_config_yaml(const ModelSpec& spec) {
  YAML::Emitter out;
  const auto& obs = spec.observation;
  out << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << to_string(obs.family);
  out << YAML::Key << "response" << YAML::Value << obs.response;
  out << YAML::Key << "covariates" << YAML::Value;
  emit_names(out, obs.covariates);
  if (obs.family == Family::Binomial) {
    if (obs.trials_column) {
      out << YAML::Key << "trials_column" << YAML::Value << *obs.trials_column;
    } else {
      out << YAML::Key << "trials" << YAML::Value << obs.trials;
    }
  }
  if (obs.random_effect) {
    out << YAML::Key << "random_effect" << YAML::Value << YAML::BeginMap << YAML::Key << "precision" << YAML::Value;
    emit_prior(out, obs.random_effect->precision);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "error" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(spec.error.kind);
  out << YAML::Key << "proxies" << YAML::Value;
  emit_names(out, spec.error.proxies);
  if (spec.error.weights) out << YAML::Key << "weights" << YAML::Value << *spec.error.weights;
  if (spec.error.group) out << YAML::Key << "group" << YAML::Value << *spec.error.group;
  out << YAML::Key << "precision" << YAML::Value;
  emit_prior(out, spec.error.precision);
  out << YAML::EndMap;

  if (spec.exposure) {
    const auto& ex = *spec.exposure;
    out << YAML::Key << "exposure" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "covariates" << YAML::Value;
    emit_names(out, ex.covariates);
    out << YAML::Key << "intercept" << YAML::Value;
    emit_prior(out, ex.intercept);
    out << YAML::Key << "coefficients" << YAML::Value;
    emit_prior(out, ex.coefficients);
    out << YAML::Key << "precision" << YAML::Value;
    emit_prior(out, ex.precision);
    out << YAML::EndMap;
  }

  out << YAML::Key << "priors" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "intercept" << YAML::Value;
  emit_prior(out, obs.intercept);
  out << YAML::Key << "coefficients" << YAML::Value;
  emit_prior(out, obs.coefficients);
  out << YAML::Key << "beta_x" << YAML::Value;
  emit_prior(out, spec.beta_x);
  if (obs.family == Family::Gaussian) {
    out << YAML::Key << "residual_precision" << YAML::Value;
    emit_prior(out, obs.residual_precision);
  }
  out << YAML::EndMap;

  out << YAML::Key << "copy_precision" << YAML::Value;
  if (spec.copy_precision) {
    out << num(*spec.copy_precision);
  } else {
    out << "none";
  }
  out << YAML::Key << "center" << YAML::Value << spec.center;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace meglm
