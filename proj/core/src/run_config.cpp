#include <fstream>
#include <sstream>

#include "json.hpp"
#include "splicelab/errors.hpp"
#include "splicelab/harness.hpp"

namespace splicelab {
namespace {

using nlohmann::json;

int parse_positive_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used != text.size() || value <= 0) throw std::invalid_argument(what);
    return value;
  } catch (const std::exception&) {
    throw InvalidArgument("invalid " + what + ": '" + text + "'");
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw InvalidArgument("unknown config key '" + key + "' in " + where);
    }
  }
}

}  // namespace

std::string ExtractorChoice::label() const {
  std::string out = id;
  if (patch > 0) out += "_p" + std::to_string(patch);
  if (stride > 0) out += "_s" + std::to_string(stride);
  return out;
}

ExtractorChoice parse_extractor_choice(const std::string& text) {
  ExtractorChoice choice;
  std::stringstream ss(text);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.empty() || parts.size() > 3 || parts[0].empty()) {
    throw InvalidArgument("invalid extractor spec: '" + text +
                          "' (expected id[:patch[:stride]])");
  }
  choice.id = parts[0];
  if (parts.size() >= 2) choice.patch = parse_positive_int(parts[1], "patch");
  if (parts.size() == 3) choice.stride = parse_positive_int(parts[2], "stride");
  return choice;
}

std::unique_ptr<FeatureExtractor> instantiate_extractor(
    const ExtractorChoice& choice, int channels) {
  return make_extractor(choice.id, choice.patch, choice.stride, channels);
}

RunConfig default_run_config() {
  RunConfig cfg;
  for (const std::string& id : builtin_extractor_ids()) {
    cfg.extractors.push_back(ExtractorChoice{id, 0, 0});
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc,
             {"dataset_root", "output_root", "seed", "workers", "extractors",
              "attack", "gen", "scale_factor"},
             "config root");

  RunConfig cfg = default_run_config();
  try {
    if (doc.contains("dataset_root")) {
      cfg.dataset_root = doc["dataset_root"].get<std::string>();
    }
    if (doc.contains("output_root")) {
      cfg.output_root = doc["output_root"].get<std::string>();
    }
    if (doc.contains("seed")) {
      cfg.seed = doc["seed"].get<std::uint64_t>();
      cfg.seed_provided = true;
    }
    if (doc.contains("workers")) cfg.workers = doc["workers"].get<int>();
    if (doc.contains("extractors")) {
      cfg.extractors.clear();
      for (const json& e : doc["extractors"]) {
        cfg.extractors.push_back(
            parse_extractor_choice(e.get<std::string>()));
      }
    }
    if (doc.contains("attack")) {
      const json& a = doc["attack"];
      check_keys(a, {"alpha", "max_iters", "image_based"}, "attack");
      if (a.contains("alpha")) cfg.attack_alpha = a["alpha"].get<double>();
      if (a.contains("max_iters")) {
        cfg.attack_iters = a["max_iters"].get<int>();
      }
      if (a.contains("image_based")) {
        cfg.image_based_attack = a["image_based"].get<bool>();
      }
    }
    if (doc.contains("gen")) {
      const json& g = doc["gen"];
      check_keys(g,
                 {"count", "size", "channels", "shape", "splice_fraction",
                  "host_pipeline", "donor_pipeline"},
                 "gen");
      if (g.contains("count")) cfg.gen.count = g["count"].get<int>();
      if (g.contains("size")) cfg.gen.size = g["size"].get<int>();
      if (g.contains("channels")) cfg.gen.channels = g["channels"].get<int>();
      if (g.contains("shape")) cfg.gen.shape = g["shape"].get<std::string>();
      if (g.contains("splice_fraction")) {
        cfg.gen.splice_fraction = g["splice_fraction"].get<double>();
      }
      if (g.contains("host_pipeline")) {
        cfg.gen.host_pipeline = g["host_pipeline"].get<std::string>();
      }
      if (g.contains("donor_pipeline")) {
        cfg.gen.donor_pipeline = g["donor_pipeline"].get<std::string>();
      }
    }
    if (doc.contains("scale_factor")) {
      cfg.scale_factor = doc["scale_factor"].get<double>();
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed config value: ") + e.what());
  }

  if (cfg.workers < 1) throw InvalidArgument("workers must be >= 1");
  if (cfg.gen.count < 0) throw InvalidArgument("gen.count must be >= 0");
  if (cfg.attack_iters < 1) throw InvalidArgument("attack.max_iters must be >= 1");
  if (cfg.attack_alpha <= 0.0) throw InvalidArgument("attack.alpha must be > 0");
  if (cfg.extractors.empty()) {
    throw InvalidArgument("config lists no extractors");
  }
  for (const ExtractorChoice& choice : cfg.extractors) {
    instantiate_extractor(choice);  // validates id and overrides
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

}  // namespace splicelab
