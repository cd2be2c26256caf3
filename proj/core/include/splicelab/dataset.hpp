#pragma once

// Dataset directory convention shared by the generator, the attack, and the
// evaluation commands:
//
//   <root>/<id>/image.png       spliced (or plain) image
//   <root>/<id>/mask.png        binary ground truth, white = manipulated
//   <root>/<id>/authentic.png   optional authentic counterpart
//   <root>/manifest.json        ordered item list (+ generation specs)
//
// External datasets only need to follow the layout; the generation spec
// block in the manifest is optional.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "splicelab/image.hpp"
#include "splicelab/synthdata.hpp"

namespace splicelab {

struct DatasetItem {
  std::string id;
  bool has_authentic = false;
  std::optional<SpliceSpec> spec;  // present for generated datasets
};

struct DatasetManifest {
  std::vector<DatasetItem> items;
};

std::filesystem::path item_dir(const std::filesystem::path& root,
                               const std::string& id);

void save_manifest(const std::filesystem::path& root,
                   const DatasetManifest& manifest);

/// Throws IoError if the manifest is missing or malformed.
DatasetManifest load_manifest(const std::filesystem::path& root);

/// Writes image/mask(/authentic) PNGs for one item under the root.
void save_item(const std::filesystem::path& root, const std::string& id,
               const Image& image, const Mask& mask,
               const Image* authentic = nullptr);

Image load_item_image(const std::filesystem::path& root, const std::string& id);
Mask load_item_mask(const std::filesystem::path& root, const std::string& id);
Image load_item_authentic(const std::filesystem::path& root,
                          const std::string& id);

}  // namespace splicelab
