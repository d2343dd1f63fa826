#pragma once

// Strict JSON sweep configuration.
//
// Keys (defaults in parentheses):
//   sweep         "samples" | "model" | "features" | "spectrum"   (required)
//   grid          strictly increasing positive integers            (required)
//   n, p          integers; p is required except for feature sweeps; n for
//                 model sweeps and feature sweeps along D
//   d, D          input dimension (20) and feature count (100) for feature sweeps
//   sigma2 (0.25), b2 (1)
//   estimator     "ols" | "ridge" | "dropout_scalar" | "dropout_diagonal" |
//                 "dropout_spectral"                               ("dropout_spectral")
//   lambda        ridge penalty under a fixed policy              (0)
//   gamma_policy  "optimal" | "fixed:<g>" | "sweep:<g1>,<g2>,..."   ("optimal")
//   trials (1000), seed (0), report "excess" | "total" | "both" ("both")
//   axis "n" | "D" ("n"), target "linear_input" | "linear_features" ("linear_input"),
//   test_size (1000), train_images, train_labels, test_images, test_labels
//
// Overrides are "key=value" strings applied after the file; the value is
// parsed as JSON when possible and taken as a string otherwise.

#include <filesystem>
#include <string>
#include <vector>

#include "ddlab/harness.hpp"
#include "json.hpp"

namespace ddlab {

const std::vector<std::string>& config_keys();

/// Closest valid key, by edit distance to key prefixes.
std::string closest_key(const std::string& unknown);

GammaPolicy parse_gamma_policy(const std::string& text, const std::string& path = "/gamma_policy");
std::string gamma_policy_text(const GammaPolicy& policy);

SweepConfig parse_config_json(nlohmann::json doc, const std::vector<std::string>& overrides = {});
SweepConfig parse_config(const std::filesystem::path& path,
                         const std::vector<std::string>& overrides = {});

/// Normalized config, as echoed in JSON results.
nlohmann::json config_to_json(const SweepConfig& cfg);

}  // namespace ddlab
