#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "etbox/core.hpp"

namespace etbox::io {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  RgbImage() = default;
  RgbImage(int width, int height, std::uint8_t fill = 0);

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

// PNG (8/16-bit gray, gray+alpha, RGB, RGBA, palette) or binary PGM/PPM,
// chosen by file signature.
RgbImage read_image(const std::string& path);

void write_png(const RgbImage& image, const std::string& path);
void write_png_gray(int width, int height, const std::vector<std::uint8_t>& gray,
                    const std::string& path);

// Heatmap scaled by 255/max (when not already normalized) and rounded to
// 8-bit grayscale.
void export_heatmap_png(const Heatmap& heatmap, const std::string& path);

enum class BoxRole { kGroundTruth, kPrediction, kEt, kPredictedEt };

struct OverlayBox {
  BoundingBox box;
  BoxRole role = BoxRole::kGroundTruth;
};

// Ground truth and ET boxes are drawn as translucent fills with an outline;
// predictions as outlines only. The heatmap, when given, is blended in red
// with opacity proportional to intensity.
RgbImage compose_overlay(RgbImage base, const std::vector<OverlayBox>& boxes,
                         const Heatmap* heatmap = nullptr);

void render_overlay(const std::optional<std::string>& image_path,
                    const ImageMeta& meta, const std::vector<OverlayBox>& boxes,
                    const Heatmap* heatmap, const std::string& out_path);

}  // namespace etbox::io
