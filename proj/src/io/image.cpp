#include "etbox/io/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>

#include "etbox/heatmap.hpp"

namespace etbox::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorKind::kIo, "cannot open " + path);
  return f;
}

RgbImage read_png(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorKind::kIo, "cannot decode PNG " + path + ": " +
                                    image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorKind::kIo, "cannot decode PNG " + path + ": " +
                                    image.message);
  }
  return out;
}

// Netpbm token reader that skips whitespace and comments.
int read_pnm_int(std::istream& in) {
  int c;
  while ((c = in.peek()) != EOF) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(in >> v)) throw Error(ErrorKind::kIo, "malformed PNM header");
  return v;
}

RgbImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  char magic[2];
  in.read(magic, 2);
  const bool gray = magic[1] == '5';
  const int w = read_pnm_int(in);
  const int h = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  in.get();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorKind::kIo, "unsupported PNM " + path);
  }
  RgbImage out(w, h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> raw(gray ? n : n * 3);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!in) throw Error(ErrorKind::kIo, "truncated PNM " + path);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const int v = gray ? raw[i] : raw[i * 3 + c];
      out.pixels[i * 3 + c] = static_cast<std::uint8_t>(v * 255 / maxval);
    }
  }
  return out;
}

void blend(std::uint8_t* px, const std::uint8_t (&rgb)[3], double alpha) {
  for (int c = 0; c < 3; ++c) {
    px[c] = static_cast<std::uint8_t>(
        std::lround((1.0 - alpha) * px[c] + alpha * rgb[c]));
  }
}

void draw_box(RgbImage& img, const BoundingBox& b, const std::uint8_t (&rgb)[3],
              bool fill, int thickness) {
  const int x0 = std::max(b.x_min(), 0);
  const int y0 = std::max(b.y_min(), 0);
  const int x1 = std::min(b.x_max(), img.width);
  const int y1 = std::min(b.y_max(), img.height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool edge = x - b.x_min() < thickness ||
                        b.x_max() - 1 - x < thickness ||
                        y - b.y_min() < thickness ||
                        b.y_max() - 1 - y < thickness;
      if (edge) {
        blend(img.at(x, y), rgb, 1.0);
      } else if (fill) {
        blend(img.at(x, y), rgb, 0.35);
      }
    }
  }
}

}  // namespace

RgbImage::RgbImage(int w, int h, std::uint8_t fill)
    : width(w),
      height(h),
      pixels(static_cast<std::size_t>(w) * h * 3, fill) {
  if (w < 1 || h < 1) {
    throw Error(ErrorKind::kValidation, "image dimensions must be >= 1");
  }
}

RgbImage read_image(const std::string& path) {
  unsigned char sig[8] = {};
  {
    auto f = open_file(path, "rb");
    if (std::fread(sig, 1, sizeof(sig), f.get()) < 2) {
      throw Error(ErrorKind::kIo, "cannot read " + path);
    }
  }
  if (png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6')) return read_pnm(path);
  throw Error(ErrorKind::kIo, "unsupported image format: " + path);
}

void write_png(const RgbImage& img, const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0,
                               nullptr)) {
    throw Error(ErrorKind::kIo, "cannot write PNG " + path + ": " +
                                    image.message);
  }
}

void write_png_gray(int width, int height,
                    const std::vector<std::uint8_t>& gray,
                    const std::string& path) {
  if (gray.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorKind::kDimensionMismatch, "gray buffer size mismatch");
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, gray.data(), 0,
                               nullptr)) {
    throw Error(ErrorKind::kIo, "cannot write PNG " + path + ": " +
                                    image.message);
  }
}

void export_heatmap_png(const Heatmap& heatmap, const std::string& path) {
  const auto normalized = normalize(heatmap);
  std::vector<std::uint8_t> gray(normalized.map.values().size());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(normalized.map.values()[i], 0.0, 255.0)));
  }
  write_png_gray(heatmap.width(), heatmap.height(), gray, path);
}

RgbImage compose_overlay(RgbImage base, const std::vector<OverlayBox>& boxes,
                         const Heatmap* heatmap) {
  if (heatmap) {
    if (heatmap->width() != base.width || heatmap->height() != base.height) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "heatmap does not match the image size");
    }
    const auto normalized = normalize(*heatmap);
    static constexpr std::uint8_t kHeat[3] = {255, 32, 0};
    for (int y = 0; y < base.height; ++y) {
      for (int x = 0; x < base.width; ++x) {
        const double a = 0.6 * normalized.map.at(x, y) / 255.0;
        if (a > 0) blend(base.at(x, y), kHeat, a);
      }
    }
  }
  const int thickness = std::max(1, std::min(base.width, base.height) / 300);
  static constexpr std::uint8_t kBlue[3] = {40, 90, 255};
  static constexpr std::uint8_t kPurple[3] = {160, 60, 220};
  static constexpr std::uint8_t kMagenta[3] = {255, 0, 200};
  // Fills first so outlines stay visible.
  for (bool fills : {true, false}) {
    for (const auto& ob : boxes) {
      switch (ob.role) {
        case BoxRole::kGroundTruth:
          if (fills) draw_box(base, ob.box, kBlue, true, thickness);
          break;
        case BoxRole::kEt:
          if (fills) draw_box(base, ob.box, kPurple, true, thickness);
          break;
        case BoxRole::kPrediction:
          if (!fills) draw_box(base, ob.box, kBlue, false, thickness * 2);
          break;
        case BoxRole::kPredictedEt:
          if (!fills) draw_box(base, ob.box, kMagenta, false, thickness * 2);
          break;
      }
    }
  }
  return base;
}

void render_overlay(const std::optional<std::string>& image_path,
                    const ImageMeta& meta, const std::vector<OverlayBox>& boxes,
                    const Heatmap* heatmap, const std::string& out_path) {
  RgbImage base = image_path ? read_image(*image_path)
                             : RgbImage(meta.width_px, meta.height_px, 0);
  if (base.width != meta.width_px || base.height != meta.height_px) {
    throw Error(ErrorKind::kDimensionMismatch,
                "image " + *image_path + " is " + std::to_string(base.width) +
                    "x" + std::to_string(base.height) + ", meta says " +
                    std::to_string(meta.width_px) + "x" +
                    std::to_string(meta.height_px));
  }
  write_png(compose_overlay(std::move(base), boxes, heatmap), out_path);
}

}  // namespace etbox::io
