#include "meglm/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "meglm/dataset.hpp"
#include "meglm/errors.hpp"

namespace meglm {

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::ordered_json report_json(const PosteriorReport& report, std::optional<double> seconds) {
  nlohmann::ordered_json j;
  j["method"] = to_string(report.method);
  j["family"] = report.family;
  j["error"] = report.error_kind;
  j["observations"] = report.observations;
  j["centering"] = report.centering;
  if (report.method == Method::Mcmc) {
    const auto& c = report.chain_config;
    j["chain"] = {{"iterations", c.iterations}, {"burn_in", c.burn_in}, {"thin", c.thin}, {"seed", c.seed}};
    if (report.chain) {
      j["chain"]["draws"] = report.chain->draws.rows();
      j["chain"]["acceptance_rates"] = report.chain->acceptance_rates;
    }
  } else {
    j["grid"] = {{"dz", report.dz},
                 {"diff_logdens", report.diff_logdens},
                 {"points", report.grid_points},
                 {"evaluations", report.grid_evaluations},
                 {"truncated", report.grid_truncated}};
  }
  if (seconds) j["seconds"] = *seconds;
  auto& params = j["parameters"] = nlohmann::ordered_json::array();
  for (const auto& p : report.parameters) {
    nlohmann::ordered_json e;
    e["parameter"] = p.parameter;
    e["method"] = p.method;
    e["mean"] = p.mean;
    e["sd"] = p.sd;
    e["q025"] = p.q025;
    e["q50"] = p.q50;
    e["q975"] = p.q975;
    if (p.values.empty()) {
      e["marginal"] = nullptr;
    } else {
      e["marginal"] = "marginals/" + p.parameter + ".csv";
    }
    params.push_back(std::move(e));
  }
  return j;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace

void write_report(const PosteriorReport& report, const std::filesystem::path& dir, std::optional<double> seconds) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "marginals", ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_text(dir / "summary.json", report_json(report, seconds).dump(2) + "\n");
  for (const auto& p : report.parameters) {
    if (p.values.empty()) continue;
    std::ostringstream csv;
    csv << "value,density\n";
    for (std::size_t k = 0; k < p.values.size(); ++k)
      csv << format_double(p.values[k]) << ',' << format_double(p.density[k]) << '\n';
    write_text(dir / "marginals" / (p.parameter + ".csv"), csv.str());
  }
  if (report.chain) {
    const auto& c = *report.chain;
    std::ostringstream csv;
    for (std::size_t k = 0; k < c.names.size(); ++k) csv << (k ? "," : "") << c.names[k];
    csv << '\n';
    for (Eigen::Index r = 0; r < c.draws.rows(); ++r) {
      for (Eigen::Index k = 0; k < c.draws.cols(); ++k) csv << (k ? "," : "") << format_double(c.draws(r, k));
      csv << '\n';
    }
    write_text(dir / "draws.csv", csv.str());
  }
}

std::vector<ParameterSummary> read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  std::vector<ParameterSummary> out;
  try {
    for (const auto& e : j.at("parameters")) {
      ParameterSummary p;
      p.parameter = e.at("parameter").get<std::string>();
      p.method = e.at("method").get<std::string>();
      p.mean = e.at("mean").get<double>();
      p.sd = e.at("sd").get<double>();
      p.q025 = e.at("q025").get<double>();
      p.q50 = e.at("q50").get<double>();
      p.q975 = e.at("q975").get<double>();
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": malformed summary (" + e.what() + ")");
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> read_marginal_csv(const std::filesystem::path& path) {
  const Dataset d = Dataset::read_csv(path.string());
  return {d.complete("value"), d.complete("density")};
}

std::string comparison_csv(const std::vector<ComparisonInput>& inputs, const std::map<std::string, double>& truth) {
  std::vector<std::string> params;
  for (const auto& in : inputs)
    for (const auto& p : in.parameters)
      if (std::find(params.begin(), params.end(), p.parameter) == params.end()) params.push_back(p.parameter);

  auto lookup = [](const ComparisonInput& in, const std::string& name) -> const ParameterSummary* {
    for (const auto& p : in.parameters)
      if (p.parameter == name) return &p;
    return nullptr;
  };
  const ComparisonInput* naive = nullptr;
  const ComparisonInput* corrected = nullptr;
  for (const auto& in : inputs) {
    if (in.method == "naive") naive = &in;
    if (in.method == "laplace" || (in.method == "mcmc" && !corrected)) corrected = &in;
  }

  std::ostringstream out;
  out << "parameter";
  for (const auto& in : inputs) out << ',' << in.method << "_mean," << in.method << "_q025," << in.method << "_q975";
  if (!truth.empty()) out << ",true";
  out << ",direction\n";
  for (const auto& name : params) {
    out << name;
    for (const auto& in : inputs) {
      const auto* p = lookup(in, name);
      if (p) {
        out << ',' << format_double(p->mean) << ',' << format_double(p->q025) << ',' << format_double(p->q975);
      } else {
        out << ",NA,NA,NA";
      }
    }
    const auto t = truth.find(name);
    if (!truth.empty()) out << ',' << (t == truth.end() ? "NA" : format_double(t->second));
    std::string flag;
    if (name == "beta_x" && naive) {
      const auto* nv = lookup(*naive, name);
      std::optional<double> reference;
      if (t != truth.end()) {
        reference = t->second;
      } else if (corrected) {
        if (const auto* c = lookup(*corrected, name)) reference = c->mean;
      }
      if (nv && reference) flag = std::abs(nv->mean) < std::abs(*reference) ? "attenuated" : "not-attenuated";
    }
    out << ',' << flag << '\n';
  }
  return out.str();
}

}  // namespace meglm
