#include "splicelab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string_view>
#include <thread>

#include "json.hpp"
#include "splicelab/attack.hpp"
#include "splicelab/errors.hpp"
#include "splicelab/localizer.hpp"
#include "splicelab/png_io.hpp"
#include "splicelab/seeding.hpp"

namespace splicelab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kLaneGen = 1;
constexpr std::uint64_t kLaneGmm = 2;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Mixture-fit seed for one (item, evaluating extractor) pair. Deliberately
// independent of which set the image comes from (original, adversarial,
// scaled), so re-localizing a bit-identical image reproduces bit-identical
// scores.
std::uint64_t gmm_seed_for(const RunConfig& cfg, int item_index,
                           const std::string& evaluating_label) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(item_index),
                     splitmix64(kLaneGmm ^ fnv1a(evaluating_label)));
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string item_id_for_index(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return buf;
}

void require_seed(const RunConfig& cfg) {
  if (!cfg.seed_provided) {
    throw InvalidArgument(
        "a run seed is required (--seed or \"seed\" in the config)");
  }
}

/// Runs fn(0..count-1) on up to `workers` threads with strided assignment.
/// Exceptions escaping fn become a single hard error after all items ran.
void for_each_item(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  workers = std::clamp(workers, 1, count);
  std::mutex error_mutex;
  std::string first_error;
  bool failed = false;
  auto guarded = [&](int i) {
    try {
      fn(i);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!failed) {
        failed = true;
        first_error = e.what();
      }
    }
  };
  if (workers == 1) {
    for (int i = 0; i < count; ++i) guarded(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < count; i += workers) guarded(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  if (failed) throw Error("item processing failed: " + first_error);
}

void write_text_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_json_file(const fs::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

fs::path adv_dir(const RunConfig& cfg, const std::string& source_label) {
  return cfg.output_root / "adv" / source_label;
}

fs::path adv_image_path(const RunConfig& cfg, const std::string& source_label,
                        const std::string& id) {
  return adv_dir(cfg, source_label) / id / "image.png";
}

bool adv_set_exists(const RunConfig& cfg, const std::string& source_label) {
  return fs::exists(adv_dir(cfg, source_label) / "summary.json");
}

std::int64_t manipulated_count(const Mask& mask) {
  std::int64_t m = 0;
  for (std::uint8_t v : mask.values) m += v;
  return m;
}

// ---------------------------------------------------------------------------
// Shared set evaluation: localize every manifest item of a set with one
// evaluating extractor and aggregate oracle-threshold metrics.

struct ImageLoadResult {
  bool present = false;
  Image image;
};

using ImageLoader =
    std::function<ImageLoadResult(const DatasetItem&, int index)>;

struct PerImageEval {
  enum class Status { ok, missing, failed };
  Status status = Status::missing;
  std::string error;
  MetricsReport report;
};

struct SetEvaluation {
  std::string regime;
  std::string attack_source;
  std::vector<PerImageEval> per_image;  // manifest order
  std::vector<MetricsReport> reports;   // ok items only, manifest order
  int missing = 0;
  int failed = 0;
  bool has_row = false;
  DatasetRow row;
};

SetEvaluation evaluate_set(const DatasetManifest& manifest,
                           const RunConfig& cfg,
                           const ExtractorChoice& evaluating,
                           const std::string& regime,
                           const std::string& attack_source,
                           const ImageLoader& loader) {
  SetEvaluation out;
  out.regime = regime;
  out.attack_source = attack_source;
  const int n = static_cast<int>(manifest.items.size());
  out.per_image.resize(n);
  const std::string label = evaluating.label();
  out.row.method_id = label;
  out.row.regime = regime;
  out.row.attack_source = attack_source;

  for_each_item(n, cfg.workers, [&](int i) {
    PerImageEval& slot = out.per_image[i];
    const DatasetItem& item = manifest.items[i];
    try {
      const ImageLoadResult loaded = loader(item, i);
      if (!loaded.present) {
        slot.status = PerImageEval::Status::missing;
        return;
      }
      const Mask mask = load_item_mask(cfg.dataset_root, item.id);
      const auto extractor =
          instantiate_extractor(evaluating, loaded.image.channels);
      const Heatmap heatmap =
          localize(loaded.image, *extractor, gmm_seed_for(cfg, i, label));
      MetricsReport report = evaluate_pair(heatmap, mask);
      report.image_id = item.id;
      report.method_id = label;
      report.attack_id = attack_source;
      slot.report = std::move(report);
      slot.status = PerImageEval::Status::ok;
    } catch (const std::exception& e) {
      slot.status = PerImageEval::Status::failed;
      slot.error = e.what();
    }
  });

  for (const PerImageEval& slot : out.per_image) {
    switch (slot.status) {
      case PerImageEval::Status::ok:
        out.reports.push_back(slot.report);
        break;
      case PerImageEval::Status::missing:
        ++out.missing;
        break;
      case PerImageEval::Status::failed:
        ++out.failed;
        break;
    }
  }
  if (!out.reports.empty()) {
    out.row = aggregate(out.reports, label, regime, attack_source, out.missing);
    out.has_row = true;
  }
  return out;
}

ImageLoader dataset_loader(const RunConfig& cfg) {
  return [&cfg](const DatasetItem& item, int) {
    return ImageLoadResult{true, load_item_image(cfg.dataset_root, item.id)};
  };
}

ImageLoader adversarial_loader(const RunConfig& cfg,
                               const std::string& source_label) {
  return [&cfg, source_label](const DatasetItem& item, int) {
    const fs::path path = adv_image_path(cfg, source_label, item.id);
    if (!fs::exists(path)) return ImageLoadResult{};
    return ImageLoadResult{true, load_png(path)};
  };
}

ImageLoader scaled_loader(const RunConfig& cfg, const std::string& source_label,
                          double factor) {
  return [&cfg, source_label, factor](const DatasetItem& item, int) {
    const fs::path path = adv_image_path(cfg, source_label, item.id);
    if (!fs::exists(path)) return ImageLoadResult{};
    const Image original = load_item_image(cfg.dataset_root, item.id);
    const Image adversarial = load_png(path);
    return ImageLoadResult{
        true, scale_perturbation(original, adversarial, factor)};
  };
}

std::string csv_metrics_row(const DatasetRow& row) {
  return row.method_id + "," + row.regime + "," + row.attack_source + "," +
         fmt6(row.f1) + "," + fmt6(row.mcc) + "," + fmt6(row.auc) + "," +
         fmt6(row.map);
}

json row_to_json(const SetEvaluation& ev) {
  json per_image = json::array();
  json failed = json::array();
  for (size_t i = 0; i < ev.per_image.size(); ++i) {
    const PerImageEval& slot = ev.per_image[i];
    if (slot.status == PerImageEval::Status::ok) {
      const MetricsReport& r = slot.report;
      per_image.push_back(json{{"id", r.image_id},
                               {"f1", r.f1},
                               {"mcc", r.mcc},
                               {"auc", r.auc},
                               {"map", r.map},
                               {"threshold", r.threshold},
                               {"polarity", to_string(r.polarity)}});
    } else if (slot.status == PerImageEval::Status::failed) {
      failed.push_back(json{{"index", i}, {"error", slot.error}});
    }
  }
  json out{{"method", ev.row.method_id},
           {"regime", ev.regime},
           {"attack_source", ev.attack_source},
           {"image_count", ev.row.image_count},
           {"missing_count", ev.missing},
           {"f1", ev.row.f1},
           {"mcc", ev.row.mcc},
           {"auc", ev.row.auc},
           {"map", ev.row.map},
           {"per_image", std::move(per_image)}};
  if (!failed.empty()) out["failed"] = std::move(failed);
  return out;
}

struct AllAuthenticRow {
  double f1 = 0.0;
  int image_count = 0;
};

// Reference row: the score a "predict everything manipulated" decision
// would earn, computed from masks alone. Per image F1 = 2M / (M + T) with
// M manipulated pixels out of T total.
AllAuthenticRow all_authentic_row(const DatasetManifest& manifest,
                                  const RunConfig& cfg) {
  AllAuthenticRow out;
  std::vector<double> f1(manifest.items.size(), 0.0);
  for_each_item(static_cast<int>(manifest.items.size()), cfg.workers,
                [&](int i) {
                  const Mask mask =
                      load_item_mask(cfg.dataset_root, manifest.items[i].id);
                  const double m =
                      static_cast<double>(manipulated_count(mask));
                  const double t = static_cast<double>(mask.values.size());
                  f1[i] = (m + t) > 0.0 ? 2.0 * m / (m + t) : 0.0;
                });
  for (double v : f1) out.f1 += v;
  if (!manifest.items.empty()) out.f1 /= static_cast<double>(f1.size());
  out.image_count = static_cast<int>(manifest.items.size());
  return out;
}

void warn_row_omitted(const std::string& method, const std::string& regime,
                      const std::string& source, const std::string& reason) {
  std::cerr << "warning: row omitted (" << method << ", " << regime << ", "
            << source << "): " << reason << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const RunConfig& cfg) {
  require_seed(cfg);
  splice_shape_from_string(cfg.gen.shape);  // validate early
  stock_pipeline(cfg.gen.host_pipeline);
  stock_pipeline(cfg.gen.donor_pipeline);

  const int n = cfg.gen.count;
  struct Slot {
    bool ok = false;
    std::string error;
    DatasetItem item;
  };
  std::vector<Slot> slots(n);

  for_each_item(n, cfg.workers, [&](int i) {
    Slot& slot = slots[i];
    SpliceSpec spec;
    spec.size = cfg.gen.size;
    spec.channels = cfg.gen.channels;
    spec.shape = splice_shape_from_string(cfg.gen.shape);
    spec.splice_fraction = cfg.gen.splice_fraction;
    spec.host_pipeline = cfg.gen.host_pipeline;
    spec.donor_pipeline = cfg.gen.donor_pipeline;
    spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i), kLaneGen);
    const std::string id = item_id_for_index(i);
    try {
      const SpliceSample sample = make_splice(spec);
      save_item(cfg.dataset_root, id, sample.image, sample.mask,
                &sample.host_only);
      slot.item = DatasetItem{id, true, spec};
      slot.ok = true;
    } catch (const InfeasibleSpec& e) {
      slot.error = e.what();
    }
  });

  DatasetManifest manifest;
  json infeasible = json::array();
  for (int i = 0; i < n; ++i) {
    if (slots[i].ok) {
      manifest.items.push_back(slots[i].item);
    } else {
      infeasible.push_back(
          json{{"id", item_id_for_index(i)}, {"error", slots[i].error}});
    }
  }
  save_manifest(cfg.dataset_root, manifest);
  write_json_file(cfg.dataset_root / "gen_summary.json",
                  json{{"requested", n},
                       {"generated", manifest.items.size()},
                       {"infeasible", infeasible}});
  std::cout << "gen: " << manifest.items.size() << "/" << n
            << " items under " << cfg.dataset_root.string() << "\n";
  return infeasible.empty() ? 0 : 2;
}

// ---------------------------------------------------------------------------
// localize

int cmd_localize(const RunConfig& cfg) {
  require_seed(cfg);
  const DatasetManifest manifest = load_manifest(cfg.dataset_root);
  const int n = static_cast<int>(manifest.items.size());

  std::vector<std::string> csv_lines;
  json rows = json::array();
  int failures = 0;

  for (const ExtractorChoice& choice : cfg.extractors) {
    const std::string label = choice.label();
    const fs::path root = cfg.output_root / "localize" / label;

    struct Slot {
      bool ok = false;
      std::string error;
      MetricsReport report;
    };
    std::vector<Slot> slots(n);

    for_each_item(n, cfg.workers, [&](int i) {
      Slot& slot = slots[i];
      const DatasetItem& item = manifest.items[i];
      try {
        const Image image = load_item_image(cfg.dataset_root, item.id);
        const Mask mask = load_item_mask(cfg.dataset_root, item.id);
        const auto extractor = instantiate_extractor(choice, image.channels);
        const Heatmap heatmap =
            localize(image, *extractor, gmm_seed_for(cfg, i, label));

        const fs::path dir = root / item.id;
        fs::create_directories(dir);
        save_heatmap_png(dir / "heatmap.png", heatmap);
        save_heatmap_color_png(dir / "heatmap_color.png", heatmap);
        const BinaryDecisionMap decision = select_threshold(heatmap, mask);
        Mask decided(decision.height, decision.width);
        decided.values = decision.values;
        save_mask_png(dir / "decision.png", decided);

        MetricsReport report = evaluate_pair(heatmap, mask);
        report.image_id = item.id;
        report.method_id = label;
        report.attack_id = "-";
        slot.report = std::move(report);
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    });

    std::vector<MetricsReport> reports;
    json items = json::array();
    json failed = json::array();
    for (int i = 0; i < n; ++i) {
      if (slots[i].ok) {
        const MetricsReport& r = slots[i].report;
        reports.push_back(r);
        items.push_back(json{{"id", r.image_id},
                             {"f1", r.f1},
                             {"mcc", r.mcc},
                             {"auc", r.auc},
                             {"map", r.map},
                             {"threshold", r.threshold},
                             {"polarity", to_string(r.polarity)}});
      } else {
        ++failures;
        failed.push_back(
            json{{"id", manifest.items[i].id}, {"error", slots[i].error}});
      }
    }
    write_json_file(root / "records.json",
                    json{{"extractor", label},
                         {"items", std::move(items)},
                         {"failed", std::move(failed)}});
    if (!reports.empty()) {
      const DatasetRow row = aggregate(reports, label, "BL", "-");
      csv_lines.push_back(csv_metrics_row(row));
      rows.push_back(json{{"method", row.method_id},
                          {"image_count", row.image_count},
                          {"f1", row.f1},
                          {"mcc", row.mcc},
                          {"auc", row.auc},
                          {"map", row.map}});
    } else {
      warn_row_omitted(label, "BL", "-", "no image localized successfully");
    }
  }

  std::string csv = "method,regime,attack_source,f1,mcc,auc,map\n";
  for (const std::string& line : csv_lines) csv += line + "\n";
  write_text_file(cfg.output_root / "localize.csv", csv);
  write_json_file(cfg.output_root / "localize.json", json{{"rows", rows}});
  std::cout << "localize: " << cfg.extractors.size() << " extractor(s) x " << n
            << " item(s)\n";
  return failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// attack

int cmd_attack(const RunConfig& cfg) {
  require_seed(cfg);
  const DatasetManifest manifest = load_manifest(cfg.dataset_root);
  const int n = static_cast<int>(manifest.items.size());
  int total_bad = 0;

  for (const ExtractorChoice& choice : cfg.extractors) {
    const std::string label = choice.label();
    const fs::path root = adv_dir(cfg, label);

    struct Slot {
      enum class Status { ok, infeasible, failed } status = Status::failed;
      std::string error;
      json record;
    };
    std::vector<Slot> slots(n);

    for_each_item(n, cfg.workers, [&](int i) {
      Slot& slot = slots[i];
      const DatasetItem& item = manifest.items[i];
      try {
        const Image image = load_item_image(cfg.dataset_root, item.id);
        const auto extractor = instantiate_extractor(choice, image.channels);
        AttackConfig attack_cfg;
        attack_cfg.alpha = cfg.attack_alpha;
        attack_cfg.max_iters = cfg.attack_iters;
        attack_cfg.extractor_id = label;

        AttackResult result;
        if (cfg.image_based_attack) {
          if (!item.has_authentic) {
            throw AttackInfeasible("no authentic counterpart for item " +
                                   item.id);
          }
          const Image reference =
              load_item_authentic(cfg.dataset_root, item.id);
          result = run_image_attack(image, reference, attack_cfg, *extractor);
        } else {
          const Mask mask = load_item_mask(cfg.dataset_root, item.id);
          result = run_attack(image, mask, attack_cfg, *extractor);
        }

        const double best_distance =
            result.best_iteration == 0
                ? result.initial_distance
                : result.distance_trace[result.best_iteration - 1];
        const PerturbationNorms norms =
            perturbation_norms(result.perturbation);

        const fs::path dir = root / item.id;
        fs::create_directories(dir);
        save_png(dir / "image.png", result.adversarial_image);
        save_perturbation_png(dir / "perturbation.png", result.perturbation);
        write_json_file(
            dir / "trace.json",
            json{{"id", item.id},
                 {"extractor", label},
                 {"alpha", cfg.attack_alpha},
                 {"max_iters", cfg.attack_iters},
                 {"image_based", cfg.image_based_attack},
                 {"authentic_patch_count", result.authentic_patch_count},
                 {"best_iteration", result.best_iteration},
                 {"initial_distance", result.initial_distance},
                 {"best_distance", best_distance},
                 {"distance_trace", result.distance_trace},
                 {"norms",
                  json{{"l0", norms.l0},
                       {"l2", norms.l2},
                       {"linf", norms.linf}}}});

        slot.record = json{{"id", item.id},
                           {"best_iteration", result.best_iteration},
                           {"initial_distance", result.initial_distance},
                           {"best_distance", best_distance},
                           {"l0", norms.l0},
                           {"l2", norms.l2},
                           {"linf", norms.linf}};
        slot.status = Slot::Status::ok;
      } catch (const AttackInfeasible& e) {
        slot.status = Slot::Status::infeasible;
        slot.error = e.what();
      } catch (const std::exception& e) {
        slot.status = Slot::Status::failed;
        slot.error = e.what();
      }
    });

    json succeeded = json::array();
    json infeasible = json::array();
    json failed = json::array();
    for (int i = 0; i < n; ++i) {
      const Slot& slot = slots[i];
      const std::string& id = manifest.items[i].id;
      switch (slot.status) {
        case Slot::Status::ok:
          succeeded.push_back(slot.record);
          break;
        case Slot::Status::infeasible:
          ++total_bad;
          infeasible.push_back(json{{"id", id}, {"reason", slot.error}});
          break;
        case Slot::Status::failed:
          ++total_bad;
          failed.push_back(json{{"id", id}, {"error", slot.error}});
          break;
      }
    }
    const size_t n_ok = succeeded.size();
    const size_t n_infeasible = infeasible.size();
    const size_t n_failed = failed.size();
    write_json_file(root / "summary.json",
                    json{{"extractor", label},
                         {"alpha", cfg.attack_alpha},
                         {"max_iters", cfg.attack_iters},
                         {"image_based", cfg.image_based_attack},
                         {"succeeded", std::move(succeeded)},
                         {"infeasible", std::move(infeasible)},
                         {"failed", std::move(failed)}});
    std::cout << "attack[" << label << "]: " << n_ok + n_infeasible + n_failed
              << " item(s), " << n_infeasible << " infeasible, " << n_failed
              << " failed\n";
  }
  return total_bad == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const RunConfig& cfg) {
  require_seed(cfg);
  const DatasetManifest manifest = load_manifest(cfg.dataset_root);

  std::vector<std::string> csv_lines;
  json rows = json::array();
  int failures = 0;

  auto emit = [&](const SetEvaluation& ev, const std::string& method) {
    failures += ev.failed;
    if (ev.has_row) {
      csv_lines.push_back(csv_metrics_row(ev.row));
      rows.push_back(row_to_json(ev));
    } else {
      warn_row_omitted(method, ev.regime, ev.attack_source,
                       "no evaluable image");
    }
  };

  for (const ExtractorChoice& choice : cfg.extractors) {
    emit(evaluate_set(manifest, cfg, choice, "BL", "-", dataset_loader(cfg)),
         choice.label());
  }
  for (const ExtractorChoice& choice : cfg.extractors) {
    const std::string label = choice.label();
    if (!adv_set_exists(cfg, label)) {
      warn_row_omitted(label, "WBA", label, "no adversarial set");
      continue;
    }
    emit(evaluate_set(manifest, cfg, choice, "WBA", label,
                      adversarial_loader(cfg, label)),
         label);
  }
  for (const ExtractorChoice& evaluating : cfg.extractors) {
    for (const ExtractorChoice& source : cfg.extractors) {
      const std::string src_label = source.label();
      if (src_label == evaluating.label()) continue;
      if (!adv_set_exists(cfg, src_label)) continue;
      emit(evaluate_set(manifest, cfg, evaluating, "TRA", src_label,
                        adversarial_loader(cfg, src_label)),
           evaluating.label());
    }
  }

  const AllAuthenticRow ref = all_authentic_row(manifest, cfg);
  json ref_json{{"method", "all_authentic"},
                {"regime", "REF"},
                {"attack_source", "-"},
                {"f1", ref.f1},
                {"mcc", 0.0},
                {"auc", "N/A"},
                {"map", "N/A"},
                {"image_count", ref.image_count}};
  csv_lines.push_back("all_authentic,REF,-," + fmt6(ref.f1) + "," + fmt6(0.0) +
                      ",N/A,N/A");

  std::string csv = "method,regime,attack_source,f1,mcc,auc,map\n";
  for (const std::string& line : csv_lines) csv += line + "\n";
  write_text_file(cfg.output_root / "eval.csv", csv);
  write_json_file(
      cfg.output_root / "eval.json",
      json{{"rows", std::move(rows)}, {"all_authentic", std::move(ref_json)}});
  std::cout << "eval: " << csv_lines.size() << " row(s) -> "
            << (cfg.output_root / "eval.csv").string() << "\n";
  return failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// transfer

int cmd_transfer(const RunConfig& cfg) {
  require_seed(cfg);
  const DatasetManifest manifest = load_manifest(cfg.dataset_root);

  std::vector<ExtractorChoice> present;
  for (const ExtractorChoice& choice : cfg.extractors) {
    if (adv_set_exists(cfg, choice.label())) {
      present.push_back(choice);
    } else {
      std::cerr << "warning: no adversarial set for " << choice.label()
                << "; excluded from the transfer matrix\n";
    }
  }
  const int k = static_cast<int>(present.size());
  if (k < 2) {
    throw InvalidArgument(
        "transfer requires adversarial sets for at least 2 extractors");
  }

  std::vector<std::vector<SetEvaluation>> cells(
      k, std::vector<SetEvaluation>(k));
  int failures = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const std::string regime = i == j ? "WBA" : "TRA";
      cells[i][j] =
          evaluate_set(manifest, cfg, present[i], regime,
                       present[j].label(), adversarial_loader(cfg, present[j].label()));
      failures += cells[i][j].failed;
    }
  }

  // Long-form CSV, row-major over (evaluating, source).
  std::string csv = "evaluating,source,regime,f1,mcc,auc,map\n";
  json cell_rows = json::array();
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const SetEvaluation& ev = cells[i][j];
      if (ev.has_row) {
        csv += present[i].label() + "," + present[j].label() + "," +
               ev.regime + "," + fmt6(ev.row.f1) + "," + fmt6(ev.row.mcc) +
               "," + fmt6(ev.row.auc) + "," + fmt6(ev.row.map) + "\n";
      } else {
        csv += present[i].label() + "," + present[j].label() + "," +
               ev.regime + ",N/A,N/A,N/A,N/A\n";
      }
      cell_rows.push_back(row_to_json(ev));
    }
  }
  write_text_file(cfg.output_root / "transfer.csv", csv);

  // F1 matrix: evaluating extractors down, attack sources across.
  std::string matrix_csv = "evaluating\\source";
  for (int j = 0; j < k; ++j) matrix_csv += "," + present[j].label();
  matrix_csv += "\n";
  for (int i = 0; i < k; ++i) {
    matrix_csv += present[i].label();
    for (int j = 0; j < k; ++j) {
      matrix_csv +=
          "," + (cells[i][j].has_row ? fmt6(cells[i][j].row.f1) : "N/A");
    }
    matrix_csv += "\n";
  }
  write_text_file(cfg.output_root / "transfer_f1_matrix.csv", matrix_csv);

  // |F1(i evaluated on j) - F1(j evaluated on i)| for unordered pairs.
  std::string asym_csv = "extractor_a,extractor_b,f1_gap\n";
  json asymmetry = json::array();
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (!cells[i][j].has_row || !cells[j][i].has_row) continue;
      const double gap = std::abs(cells[i][j].row.f1 - cells[j][i].row.f1);
      asym_csv += present[i].label() + "," + present[j].label() + "," +
                  fmt6(gap) + "\n";
      asymmetry.push_back(json{{"extractor_a", present[i].label()},
                               {"extractor_b", present[j].label()},
                               {"f1_gap", gap}});
    }
  }
  write_text_file(cfg.output_root / "transfer_asymmetry.csv", asym_csv);

  // Cell-colored F1 heatmap PNG.
  constexpr int kCell = 48;
  Image plot(k * kCell, k * kCell, 3);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      std::uint8_t rgb[3] = {128, 128, 128};
      if (cells[i][j].has_row) {
        heat_color(std::clamp(cells[i][j].row.f1, 0.0, 1.0), rgb);
      }
      for (int y = i * kCell; y < (i + 1) * kCell; ++y) {
        for (int x = j * kCell; x < (j + 1) * kCell; ++x) {
          for (int c = 0; c < 3; ++c) plot.at(y, x, c) = rgb[c];
        }
      }
    }
  }
  save_png(cfg.output_root / "transfer_f1.png", plot);

  json labels = json::array();
  for (const ExtractorChoice& choice : present) labels.push_back(choice.label());
  write_json_file(cfg.output_root / "transfer.json",
                  json{{"extractors", std::move(labels)},
                       {"cells", std::move(cell_rows)},
                       {"asymmetry", std::move(asymmetry)}});
  std::cout << "transfer: " << k << "x" << k << " matrix -> "
            << (cfg.output_root / "transfer.csv").string() << "\n";
  return failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// norms

namespace {

struct NormMeans {
  int image_count = 0;
  double l0 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  json per_image = json::array();
  int missing = 0;
  int failed = 0;
  std::vector<std::string> errors;
};

// Mean perturbation norms of a (possibly rescaled) adversarial set,
// recomputed from the saved PNG pairs rather than from attack traces.
NormMeans collect_norm_means(const DatasetManifest& manifest,
                             const RunConfig& cfg,
                             const std::string& source_label, double factor) {
  const int n = static_cast<int>(manifest.items.size());
  struct Slot {
    enum class Status { ok, missing, failed } status = Status::missing;
    std::string error;
    PerturbationNorms norms;
  };
  std::vector<Slot> slots(n);
  for_each_item(n, cfg.workers, [&](int i) {
    Slot& slot = slots[i];
    const DatasetItem& item = manifest.items[i];
    try {
      const fs::path path = adv_image_path(cfg, source_label, item.id);
      if (!fs::exists(path)) return;
      const Image original = load_item_image(cfg.dataset_root, item.id);
      Image adversarial = load_png(path);
      if (factor != 1.0) {
        adversarial = scale_perturbation(original, adversarial, factor);
      }
      slot.norms = perturbation_norms(make_perturbation(original, adversarial));
      slot.status = Slot::Status::ok;
    } catch (const std::exception& e) {
      slot.status = Slot::Status::failed;
      slot.error = e.what();
    }
  });

  NormMeans out;
  for (int i = 0; i < n; ++i) {
    const Slot& slot = slots[i];
    switch (slot.status) {
      case Slot::Status::ok:
        ++out.image_count;
        out.l0 += static_cast<double>(slot.norms.l0);
        out.l2 += slot.norms.l2;
        out.linf += slot.norms.linf;
        out.per_image.push_back(json{{"id", manifest.items[i].id},
                                     {"l0", slot.norms.l0},
                                     {"l2", slot.norms.l2},
                                     {"linf", slot.norms.linf}});
        break;
      case Slot::Status::missing:
        ++out.missing;
        break;
      case Slot::Status::failed:
        ++out.failed;
        out.errors.push_back(manifest.items[i].id + ": " + slot.error);
        break;
    }
  }
  if (out.image_count > 0) {
    out.l0 /= out.image_count;
    out.l2 /= out.image_count;
    out.linf /= out.image_count;
  }
  return out;
}

}  // namespace

int cmd_norms(const RunConfig& cfg) {
  require_seed(cfg);
  const DatasetManifest manifest = load_manifest(cfg.dataset_root);

  std::vector<ExtractorChoice> present;
  for (const ExtractorChoice& choice : cfg.extractors) {
    if (adv_set_exists(cfg, choice.label())) {
      present.push_back(choice);
    } else {
      std::cerr << "warning: no adversarial set for " << choice.label()
                << "; skipped in norms report\n";
    }
  }
  if (present.empty()) {
    throw InvalidArgument("norms requires at least one adversarial set");
  }

  std::string csv = "method,image_count,mean_l0,mean_l2,mean_linf\n";
  json rows = json::array();
  int failures = 0;
  for (const ExtractorChoice& choice : present) {
    const std::string label = choice.label();
    const NormMeans means = collect_norm_means(manifest, cfg, label, 1.0);
    failures += means.failed;
    csv += label + "," + std::to_string(means.image_count) + "," +
           fmt6(means.l0) + "," + fmt6(means.l2) + "," + fmt6(means.linf) +
           "\n";
    rows.push_back(json{{"method", label},
                        {"image_count", means.image_count},
                        {"missing_count", means.missing},
                        {"mean_l0", means.l0},
                        {"mean_l2", means.l2},
                        {"mean_linf", means.linf},
                        {"per_image", means.per_image}});
    for (const std::string& err : means.errors) {
      std::cerr << "warning: norms[" << label << "] " << err << "\n";
    }
  }
  write_text_file(cfg.output_root / "norms.csv", csv);
  write_json_file(cfg.output_root / "norms.json", json{{"rows", rows}});
  std::cout << "norms: " << present.size() << " extractor(s) -> "
            << (cfg.output_root / "norms.csv").string() << "\n";
  return failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// scale

int cmd_scale(const RunConfig& cfg) {
  require_seed(cfg);
  if (cfg.scale_factor < 0.0) {
    throw InvalidArgument("scale factor must be >= 0");
  }
  const DatasetManifest manifest = load_manifest(cfg.dataset_root);
  const double s = cfg.scale_factor;

  std::vector<ExtractorChoice> sources;
  for (const ExtractorChoice& choice : cfg.extractors) {
    if (adv_set_exists(cfg, choice.label())) {
      sources.push_back(choice);
    } else {
      std::cerr << "warning: no adversarial set for " << choice.label()
                << "; skipped in scaling experiment\n";
    }
  }
  if (sources.empty()) {
    throw InvalidArgument("scale requires at least one adversarial set");
  }

  int failures = 0;
  std::vector<NormMeans> source_norms;
  source_norms.reserve(sources.size());
  for (const ExtractorChoice& source : sources) {
    source_norms.push_back(
        collect_norm_means(manifest, cfg, source.label(), s));
    failures += source_norms.back().failed;
  }

  std::string csv =
      "method,regime,attack_source,scale,f1,mcc,auc,map,mean_l0,mean_l2,"
      "mean_linf\n";
  json rows = json::array();
  for (const ExtractorChoice& evaluating : cfg.extractors) {
    for (size_t j = 0; j < sources.size(); ++j) {
      const std::string src_label = sources[j].label();
      const std::string regime =
          evaluating.label() == src_label ? "WBA" : "TRA";
      const SetEvaluation ev =
          evaluate_set(manifest, cfg, evaluating, regime, src_label,
                       scaled_loader(cfg, src_label, s));
      failures += ev.failed;
      if (!ev.has_row) {
        warn_row_omitted(evaluating.label(), regime, src_label,
                         "no evaluable image");
        continue;
      }
      const NormMeans& means = source_norms[j];
      csv += evaluating.label() + "," + regime + "," + src_label + "," +
             fmt6(s) + "," + fmt6(ev.row.f1) + "," + fmt6(ev.row.mcc) + "," +
             fmt6(ev.row.auc) + "," + fmt6(ev.row.map) + "," +
             fmt6(means.l0) + "," + fmt6(means.l2) + "," + fmt6(means.linf) +
             "\n";
      json row = row_to_json(ev);
      row["scale"] = s;
      row["mean_l0"] = means.l0;
      row["mean_l2"] = means.l2;
      row["mean_linf"] = means.linf;
      rows.push_back(std::move(row));
    }
  }
  write_text_file(cfg.output_root / "scale.csv", csv);
  write_json_file(cfg.output_root / "scale.json",
                  json{{"scale", s}, {"rows", std::move(rows)}});
  std::cout << "scale: factor " << fmt6(s) << " -> "
            << (cfg.output_root / "scale.csv").string() << "\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace splicelab
