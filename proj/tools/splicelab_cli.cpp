// Command-line front end for the splice-localization attack laboratory.
//
//   splicelab gen      --seed 7 --count 50            render a synthetic suite
//   splicelab localize --seed 7                       heatmaps + BL metrics
//   splicelab attack   --seed 7                       adversarial images
//   splicelab eval     --seed 7                       BL/WBA/TRA metric table
//   splicelab transfer --seed 7                       cross-extractor matrix
//   splicelab norms    --seed 7                       perturbation norm means
//   splicelab scale    --seed 7 --factor 2            rescaled-perturbation study
//
// Global flags: --config <json>, --seed, --workers, --out, --dataset,
// --extractors. Command flags override config file values.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "splicelab/errors.hpp"
#include "splicelab/harness.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> output_root;
  std::optional<std::string> dataset_root;
  std::vector<std::string> extractors;

  std::optional<int> gen_count;
  std::optional<int> gen_size;
  std::optional<int> gen_channels;
  std::optional<double> gen_fraction;
  std::optional<std::string> gen_shape;
  std::optional<std::string> gen_host;
  std::optional<std::string> gen_donor;

  std::optional<double> attack_alpha;
  std::optional<int> attack_iters;
  bool image_based = false;

  std::optional<double> scale_factor;
};

splicelab::RunConfig build_config(const CliOverrides& o) {
  using namespace splicelab;
  RunConfig cfg =
      o.config_path.empty() ? default_run_config() : load_run_config(o.config_path);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.seed_provided = true;
  }
  if (o.workers) cfg.workers = *o.workers;
  if (o.output_root) cfg.output_root = *o.output_root;
  if (o.dataset_root) cfg.dataset_root = *o.dataset_root;
  if (!o.extractors.empty()) {
    cfg.extractors.clear();
    for (const std::string& text : o.extractors) {
      cfg.extractors.push_back(parse_extractor_choice(text));
    }
  }
  if (o.gen_count) cfg.gen.count = *o.gen_count;
  if (o.gen_size) cfg.gen.size = *o.gen_size;
  if (o.gen_channels) cfg.gen.channels = *o.gen_channels;
  if (o.gen_fraction) cfg.gen.splice_fraction = *o.gen_fraction;
  if (o.gen_shape) cfg.gen.shape = *o.gen_shape;
  if (o.gen_host) cfg.gen.host_pipeline = *o.gen_host;
  if (o.gen_donor) cfg.gen.donor_pipeline = *o.gen_donor;
  if (o.attack_alpha) cfg.attack_alpha = *o.attack_alpha;
  if (o.attack_iters) cfg.attack_iters = *o.attack_iters;
  if (o.image_based) cfg.image_based_attack = true;
  if (o.scale_factor) cfg.scale_factor = *o.scale_factor;

  if (cfg.workers < 1) throw InvalidArgument("workers must be >= 1");
  for (const ExtractorChoice& choice : cfg.extractors) {
    instantiate_extractor(choice);  // validates ids and overrides
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Splice-localization attack laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOverrides o;
  app.add_option("--config", o.config_path, "JSON run configuration file");
  app.add_option("--seed", o.seed,
                 "run seed; mandatory unless the config provides one");
  app.add_option("--workers", o.workers, "worker thread count");
  app.add_option("--out", o.output_root, "output directory root");
  app.add_option("--dataset", o.dataset_root, "dataset directory root");
  app.add_option("--extractors", o.extractors,
                 "extractor list, entries id[:patch[:stride]]")
      ->delimiter(',');

  CLI::App* gen = app.add_subcommand("gen", "render a synthetic spliced suite");
  gen->add_option("--count", o.gen_count, "number of images");
  gen->add_option("--size", o.gen_size, "square image size in pixels");
  gen->add_option("--channels", o.gen_channels, "1 or 3");
  gen->add_option("--fraction", o.gen_fraction, "spliced area fraction");
  gen->add_option("--shape", o.gen_shape, "rectangle or ellipse");
  gen->add_option("--host-pipeline", o.gen_host, "host camera pipeline id");
  gen->add_option("--donor-pipeline", o.gen_donor, "donor camera pipeline id");

  app.add_subcommand("localize", "heatmaps and baseline metrics per image");

  CLI::App* attack =
      app.add_subcommand("attack", "run the feature-mimicry attack");
  attack->add_option("--alpha", o.attack_alpha, "step size in gray levels");
  attack->add_option("--iters", o.attack_iters, "maximum iterations");
  attack->add_flag("--image-based", o.image_based,
                   "single whole-image patch, authentic-counterpart target");

  app.add_subcommand("eval", "BL/WBA/TRA metric table");
  app.add_subcommand("transfer", "cross-extractor transfer matrix");
  app.add_subcommand("norms", "perturbation norm means");

  CLI::App* scale =
      app.add_subcommand("scale", "re-evaluate with rescaled perturbations");
  scale->add_option("--factor", o.scale_factor, "perturbation scale factor");

  CLI11_PARSE(app, argc, argv);

  try {
    const splicelab::RunConfig cfg = build_config(o);
    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "gen") return splicelab::cmd_gen(cfg);
    if (command == "localize") return splicelab::cmd_localize(cfg);
    if (command == "attack") return splicelab::cmd_attack(cfg);
    if (command == "eval") return splicelab::cmd_eval(cfg);
    if (command == "transfer") return splicelab::cmd_transfer(cfg);
    if (command == "norms") return splicelab::cmd_norms(cfg);
    if (command == "scale") return splicelab::cmd_scale(cfg);
    std::cerr << "error: unknown command " << command << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
