#pragma once

#include <string>

#include "meglm/model.hpp"

namespace meglm {

/// Parses a YAML model description; errors (InputError) carry the line number.
ModelSpec parse_model_config(const std::string& text, const std::string& source = "<config>");
ModelSpec load_model_config(const std::string& path);

/// YAML that parse_model_config reads back to an equivalent ModelSpec.
std::string model_config_yaml(const ModelSpec& spec);

PriorSpec parse_prior(const std::string& text);

}  // namespace meglm
