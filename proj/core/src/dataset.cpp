#include "splicelab/dataset.hpp"

#include <fstream>

#include "json.hpp"
#include "splicelab/errors.hpp"
#include "splicelab/png_io.hpp"

namespace splicelab {
namespace {

using nlohmann::json;

json spec_to_json(const SpliceSpec& spec) {
  return json{{"size", spec.size},
              {"channels", spec.channels},
              {"shape", to_string(spec.shape)},
              {"splice_fraction", spec.splice_fraction},
              {"host_pipeline", spec.host_pipeline},
              {"donor_pipeline", spec.donor_pipeline},
              {"seed", spec.seed}};
}

SpliceSpec spec_from_json(const json& j) {
  SpliceSpec spec;
  spec.size = j.at("size").get<int>();
  spec.channels = j.at("channels").get<int>();
  spec.shape = splice_shape_from_string(j.at("shape").get<std::string>());
  spec.splice_fraction = j.at("splice_fraction").get<double>();
  spec.host_pipeline = j.at("host_pipeline").get<std::string>();
  spec.donor_pipeline = j.at("donor_pipeline").get<std::string>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

}  // namespace

std::filesystem::path item_dir(const std::filesystem::path& root,
                               const std::string& id) {
  return root / id;
}

void save_manifest(const std::filesystem::path& root,
                   const DatasetManifest& manifest) {
  json items = json::array();
  for (const DatasetItem& item : manifest.items) {
    json entry{{"id", item.id}, {"authentic", item.has_authentic}};
    if (item.spec) entry["spec"] = spec_to_json(*item.spec);
    items.push_back(std::move(entry));
  }
  const json doc{{"items", std::move(items)}};
  std::filesystem::create_directories(root);
  std::ofstream out(root / "manifest.json");
  if (!out) {
    throw IoError("cannot write manifest under " + root.string());
  }
  out << doc.dump(2) << '\n';
}

DatasetManifest load_manifest(const std::filesystem::path& root) {
  const std::filesystem::path path = root / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("missing manifest: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
  DatasetManifest manifest;
  try {
    for (const json& entry : doc.at("items")) {
      DatasetItem item;
      item.id = entry.at("id").get<std::string>();
      item.has_authentic = entry.value("authentic", false);
      if (entry.contains("spec")) item.spec = spec_from_json(entry["spec"]);
      manifest.items.push_back(std::move(item));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
  return manifest;
}

void save_item(const std::filesystem::path& root, const std::string& id,
               const Image& image, const Mask& mask, const Image* authentic) {
  const std::filesystem::path dir = item_dir(root, id);
  std::filesystem::create_directories(dir);
  save_png(dir / "image.png", image);
  save_mask_png(dir / "mask.png", mask);
  if (authentic) save_png(dir / "authentic.png", *authentic);
}

Image load_item_image(const std::filesystem::path& root,
                      const std::string& id) {
  return load_png(item_dir(root, id) / "image.png");
}

Mask load_item_mask(const std::filesystem::path& root, const std::string& id) {
  return load_mask_png(item_dir(root, id) / "mask.png");
}

Image load_item_authentic(const std::filesystem::path& root,
                          const std::string& id) {
  return load_png(item_dir(root, id) / "authentic.png");
}

}  // namespace splicelab
