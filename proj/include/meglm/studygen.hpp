#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "meglm/dataset.hpp"
#include "meglm/model.hpp"

namespace meglm {

enum class Study { IbexLike, FraminghamLike, SeedlingLike };

std::string to_string(Study s);
/// Accepts "ibex", "framingham", "seedling"; throws InputError otherwise.
Study parse_study(const std::string& name);

/// Generating law and true parameters of a synthetic study. Unused fields are
/// ignored for a given study.
struct StudyRecipe {
  Study study = Study::IbexLike;
  int n = 26;
  std::uint64_t seed = 1;

  double beta0 = 0.25;
  double beta_x = -1.5;
  std::vector<double> beta_z = {0.02, -0.03, 0.01, 0.0};
  double alpha0 = 0.2;
  std::vector<double> alpha_z;
  double tau_x = 100.0;
  double tau_u = 1.0;
  double tau_eps = 400.0;
  double tau_gamma = 20.0;

  // IbexLike error weights d_i = kappa / (c0 + c1 max(x_i, 0)); stand-in law.
  double c0 = 1.0;
  double c1 = 2.0;
  double kappa = 200.0;

  int replicates = 2;  // FraminghamLike
  double smoker_rate = 0.5;

  // SeedlingLike: one target value per light condition.
  std::vector<double> light_targets = {1.22, 0.10, -1.32};
  int shadehouses = 5;
  std::vector<double> defoliation = {-0.375, -0.125, 0.125, 0.375};

  void validate() const;
};

StudyRecipe default_recipe(Study s);

struct GroundTruth {
  std::map<std::string, double> parameters;
  std::vector<double> x;  // true covariate, one value per row
};

struct SimulatedStudy {
  Dataset data;
  GroundTruth truth;
  /// A model specification matching the study design.
  ModelSpec spec;
};

/// Deterministic given recipe.seed.
SimulatedStudy simulate(const StudyRecipe& recipe);

std::string ground_truth_json(const StudyRecipe& recipe, const GroundTruth& truth);

}  // namespace meglm
