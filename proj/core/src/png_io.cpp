#include "splicelab/png_io.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "splicelab/errors.hpp"

namespace splicelab {

namespace {

cv::Mat read_mat(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw IoError("cannot read PNG: " + path.string());
  if (mat.depth() != CV_8U) {
    throw IoError("expected 8-bit PNG: " + path.string());
  }
  return mat;
}

void write_mat(const std::filesystem::path& path, const cv::Mat& mat) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  if (!cv::imwrite(path.string(), mat)) {
    throw IoError("cannot write PNG: " + path.string());
  }
}

}  // namespace

Image load_png(const std::filesystem::path& path) {
  cv::Mat mat = read_mat(path);
  if (mat.channels() == 4) {
    cv::Mat tmp;
    cv::mixChannels({mat}, {tmp = cv::Mat(mat.rows, mat.cols, CV_8UC3)},
                    {0, 0, 1, 1, 2, 2});
    mat = tmp;
  }
  if (mat.channels() != 1 && mat.channels() != 3) {
    throw IoError("expected 1- or 3-channel PNG: " + path.string());
  }
  Image img(mat.rows, mat.cols, mat.channels());
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      if (mat.channels() == 1) {
        img.at(y, x, 0) = row[x];
      } else {
        // OpenCV stores BGR; the library works in RGB.
        img.at(y, x, 0) = row[3 * x + 2];
        img.at(y, x, 1) = row[3 * x + 1];
        img.at(y, x, 2) = row[3 * x + 0];
      }
    }
  }
  return img;
}

void save_png(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw IoError("PNG save supports 1 or 3 channels");
  }
  cv::Mat mat(image.height, image.width,
              image.channels == 1 ? CV_8UC1 : CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        const double v = image.at(y, x, c);
        if (v < 0.0 || v > 255.0 || v != std::round(v)) {
          throw OutOfRange("save_png requires a quantized image in [0, 255]");
        }
        const int dst_c = image.channels == 1 ? 0 : 2 - c;  // RGB -> BGR
        row[image.channels * x + dst_c] = static_cast<std::uint8_t>(v);
      }
    }
  }
  write_mat(path, mat);
}

Mask load_mask_png(const std::filesystem::path& path) {
  cv::Mat mat = read_mat(path);
  Mask mask(mat.rows, mat.cols);
  const int ch = mat.channels();
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      std::uint8_t m = 0;
      for (int c = 0; c < ch; ++c) m = std::max(m, row[ch * x + c]);
      mask.at(y, x) = m != 0 ? 1 : 0;
    }
  }
  return mask;
}

void save_mask_png(const std::filesystem::path& path, const Mask& mask) {
  cv::Mat mat(mask.height, mask.width, CV_8UC1);
  for (int y = 0; y < mask.height; ++y) {
    std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width; ++x) {
      row[x] = mask.at(y, x) ? 255 : 0;
    }
  }
  write_mat(path, mat);
}

void save_perturbation_png(const std::filesystem::path& path,
                           const Perturbation& p, double k) {
  Image vis(p.height, p.width, p.channels);
  for (size_t i = 0; i < p.delta.size(); ++i) {
    vis.data[i] = 128.0 + k * p.delta[i];
  }
  clip_in_place(vis);
  save_png(path, quantize_image(vis));
}

void save_heatmap_png(const std::filesystem::path& path, const Heatmap& map) {
  Image img(map.height, map.width, 1);
  for (size_t i = 0; i < map.scores.size(); ++i) {
    img.data[i] = std::round(std::clamp(map.scores[i], 0.0, 1.0) * 255.0);
  }
  save_png(path, img);
}

void heat_color(double t, std::uint8_t rgb[3]) {
  t = std::clamp(t, 0.0, 1.0);
  double r = 0.0, g = 0.0, b = 0.0;
  if (t < 0.25) {  // blue -> cyan
    r = 0.0, g = 4.0 * t, b = 1.0;
  } else if (t < 0.5) {  // cyan -> green
    r = 0.0, g = 1.0, b = 1.0 - 4.0 * (t - 0.25);
  } else if (t < 0.75) {  // green -> yellow
    r = 4.0 * (t - 0.5), g = 1.0, b = 0.0;
  } else {  // yellow -> red
    r = 1.0, g = 1.0 - 4.0 * (t - 0.75), b = 0.0;
  }
  rgb[0] = static_cast<std::uint8_t>(std::round(255.0 * r));
  rgb[1] = static_cast<std::uint8_t>(std::round(255.0 * g));
  rgb[2] = static_cast<std::uint8_t>(std::round(255.0 * b));
}

void save_heatmap_color_png(const std::filesystem::path& path,
                            const Heatmap& map) {
  Image img(map.height, map.width, 3);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      std::uint8_t rgb[3];
      heat_color(map.at(y, x), rgb);
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = rgb[c];
    }
  }
  save_png(path, img);
}

}  // namespace splicelab
