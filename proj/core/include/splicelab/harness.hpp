#pragma once

// Experiment orchestration: dataset generation, batch localization, batch
// attacks, metric tables, the transferability matrix, perturbation-norm
// reports, and the perturbation-scaling experiment.
//
// All commands are deterministic functions of (RunConfig, manifest): every
// random stream is derived from the single run seed plus the item's
// manifest index, and aggregation consumes per-item results in manifest
// order, so reports do not depend on the worker count.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "splicelab/dataset.hpp"
#include "splicelab/features.hpp"
#include "splicelab/metrics.hpp"

namespace splicelab {

/// One configured extractor: a registry id plus optional patch/stride
/// overrides (0 = extractor default). Parsed from "id[:patch[:stride]]".
struct ExtractorChoice {
  std::string id;
  int patch = 0;
  int stride = 0;

  /// Directory / report name: the id alone at defaults, otherwise
  /// id_p<patch>[_s<stride>].
  std::string label() const;
};

ExtractorChoice parse_extractor_choice(const std::string& text);

std::unique_ptr<FeatureExtractor> instantiate_extractor(
    const ExtractorChoice& choice, int channels = 3);

struct GenParams {
  int count = 50;
  int size = 128;
  int channels = 3;
  std::string shape = "rectangle";
  double splice_fraction = 0.25;
  std::string host_pipeline = "cam_a";
  std::string donor_pipeline = "cam_b";
};

struct RunConfig {
  std::filesystem::path dataset_root = "dataset";
  std::filesystem::path output_root = "out";
  std::vector<ExtractorChoice> extractors;  // defaults to all built-ins
  double attack_alpha = 5.0;
  int attack_iters = 50;
  /// Single whole-image patch targeting the authentic counterpart's
  /// features instead of the per-patch mean target.
  bool image_based_attack = false;
  std::uint64_t seed = 0;
  bool seed_provided = false;
  int workers = 1;
  GenParams gen;
  double scale_factor = 2.0;
};

RunConfig default_run_config();

/// Reads a JSON config file; unknown keys are an error. Fields not present
/// keep their defaults.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

// Commands return a process exit code: 0 success, 2 when some items were
// infeasible or failed while the batch continued. Hard errors throw.
int cmd_gen(const RunConfig& config);
int cmd_localize(const RunConfig& config);
int cmd_attack(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_transfer(const RunConfig& config);
int cmd_norms(const RunConfig& config);
int cmd_scale(const RunConfig& config);

}  // namespace splicelab
