#include "bgm/render.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "bgm/social.hpp"

namespace bgm {

namespace {

void push_be32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

void push_chunk(std::string& out, const char type[4], const std::string& data) {
  push_be32(out, static_cast<uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()));
  push_be32(out, static_cast<uint32_t>(crc));
}

std::string deflate_bytes(const std::string& raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string out(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(out.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                9) != Z_OK)
    throw std::runtime_error("png: deflate failed");
  out.resize(bound);
  return out;
}

void write_png(const std::string& path, int height, int width, int channels,
               const std::vector<uint8_t>& pixels,
               const std::vector<std::pair<std::string, std::string>>& text) {
  if (height < 1 || width < 1 ||
      pixels.size() != static_cast<size_t>(height) * width * channels)
    throw std::invalid_argument("png: pixel buffer does not match dimensions");

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  push_be32(ihdr, static_cast<uint32_t>(width));
  push_be32(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);                               // bit depth
  ihdr.push_back(channels == 1 ? '\x00' : '\x02');  // gray / rgb
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  push_chunk(png, "IHDR", ihdr);

  for (const auto& [key, value] : text) {
    std::string data = key;
    data.push_back('\0');
    data += value;
    push_chunk(png, "tEXt", data);
  }

  std::string raw;
  raw.reserve(static_cast<size_t>(height) * (1 + static_cast<size_t>(width) * channels));
  for (int r = 0; r < height; ++r) {
    raw.push_back('\0');  // filter: none
    raw.append(reinterpret_cast<const char*>(pixels.data()) +
                   static_cast<size_t>(r) * width * channels,
               static_cast<size_t>(width) * channels);
  }
  push_chunk(png, "IDAT", deflate_bytes(raw));
  push_chunk(png, "IEND", "");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("png: cannot write " + path);
  out.write(png.data(), static_cast<std::streamsize>(png.size()));
  if (!out) throw std::runtime_error("png: write failed for " + path);
}

std::vector<std::pair<std::string, std::string>> fingerprint_text(const RenderOptions& opt) {
  if (!opt.config_fingerprint) return {};
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(*opt.config_fingerprint));
  return {{"bgm-config", hex}};
}

std::vector<uint8_t> upscale(const std::vector<uint8_t>& px, int rows, int cols, int channels,
                             int block) {
  if (block <= 1) return px;
  std::vector<uint8_t> out(static_cast<size_t>(rows) * block * cols * block * channels);
  for (int r = 0; r < rows * block; ++r)
    for (int c = 0; c < cols * block; ++c)
      for (int ch = 0; ch < channels; ++ch)
        out[(static_cast<size_t>(r) * cols * block + c) * channels + ch] =
            px[(static_cast<size_t>(r / block) * cols + c / block) * channels + ch];
  return out;
}

}  // namespace

void write_png_gray(const std::string& path, int height, int width,
                    const std::vector<uint8_t>& pixels,
                    const std::vector<std::pair<std::string, std::string>>& text) {
  write_png(path, height, width, 1, pixels, text);
}

void write_png_rgb(const std::string& path, int height, int width,
                   const std::vector<uint8_t>& rgb,
                   const std::vector<std::pair<std::string, std::string>>& text) {
  write_png(path, height, width, 3, rgb, text);
}

namespace {

std::vector<uint8_t> gray_from_counts(const std::vector<int32_t>& counts) {
  int32_t maxv = 0;
  for (int32_t c : counts) maxv = std::max(maxv, c);
  std::vector<uint8_t> px(counts.size(), 0);
  if (maxv > 0)
    for (size_t i = 0; i < counts.size(); ++i)
      px[i] = static_cast<uint8_t>(std::lround(255.0 * counts[i] / maxv));
  return px;
}

}  // namespace

void render_map(const GuidanceMap& map, const std::string& path, const RenderOptions& opt) {
  auto px = upscale(gray_from_counts(map.counts), map.spec.rows, map.spec.cols, 1,
                    opt.pixels_per_cell);
  write_png_gray(path, map.spec.rows * opt.pixels_per_cell, map.spec.cols * opt.pixels_per_cell,
                 px, fingerprint_text(opt));
}

void render_map(const LocalMap& local, const std::string& path, const RenderOptions& opt) {
  auto px = upscale(gray_from_counts(local.patch), local.side, local.side, 1,
                    opt.pixels_per_cell);
  write_png_gray(path, local.side * opt.pixels_per_cell, local.side * opt.pixels_per_cell, px,
                 fingerprint_text(opt));
}

void render_map(const social::EnergyField& field, const std::string& path,
                const RenderOptions& opt) {
  double lo = 0.0, hi = 0.0;
  for (double v : field.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = std::max(hi - lo, 1e-12);
  std::vector<uint8_t> rgb(field.values.size() * 3);
  for (size_t i = 0; i < field.values.size(); ++i) {
    const double t = (field.values[i] - lo) / span;  // 0 = lowest energy
    // blue -> white -> yellow ramp
    const double r = t < 0.5 ? 2.0 * t : 1.0;
    const double g = t < 0.5 ? 2.0 * t : 1.0;
    const double b = t < 0.5 ? 1.0 : 2.0 * (1.0 - t);
    rgb[3 * i] = static_cast<uint8_t>(std::lround(255.0 * r));
    rgb[3 * i + 1] = static_cast<uint8_t>(std::lround(255.0 * g));
    rgb[3 * i + 2] = static_cast<uint8_t>(std::lround(255.0 * b));
  }
  auto px = upscale(rgb, field.spec.rows, field.spec.cols, 3, opt.pixels_per_cell);
  write_png_rgb(path, field.spec.rows * opt.pixels_per_cell,
                field.spec.cols * opt.pixels_per_cell, px, fingerprint_text(opt));
}

void render_trajectories(const GuidanceMap& backdrop, const std::vector<TrajectoryLayer>& layers,
                         const std::string& path, const RenderOptions& opt) {
  const int rows = backdrop.spec.rows;
  const int cols = backdrop.spec.cols;
  auto gray = gray_from_counts(backdrop.counts);
  std::vector<uint8_t> rgb(gray.size() * 3);
  for (size_t i = 0; i < gray.size(); ++i) {
    const uint8_t g = static_cast<uint8_t>(gray[i] / 2);  // dim the backdrop
    rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = g;
  }
  auto plot = [&](TrajPoint p, const TrajectoryLayer& layer) {
    const GridCell cell = world_to_grid(p, backdrop.spec);
    if (!cell.in_bounds) return;
    const size_t i = static_cast<size_t>(cell.row) * cols + cell.col;
    rgb[3 * i] = layer.r;
    rgb[3 * i + 1] = layer.g;
    rgb[3 * i + 2] = layer.b;
  };
  for (const auto& layer : layers) {
    for (size_t i = 0; i + 1 < layer.points.size(); ++i) {
      const TrajPoint a = layer.points[i];
      const TrajPoint b = layer.points[i + 1];
      const int steps = std::max(
          2, static_cast<int>(std::ceil(dist(a, b) / backdrop.spec.resolution)) * 2);
      for (int s = 0; s <= steps; ++s)
        plot(a + (static_cast<double>(s) / steps) * (b - a), layer);
    }
    if (layer.points.size() == 1) plot(layer.points[0], layer);
  }
  auto px = upscale(rgb, rows, cols, 3, opt.pixels_per_cell);
  write_png_rgb(path, rows * opt.pixels_per_cell, cols * opt.pixels_per_cell, px,
                fingerprint_text(opt));
}

std::vector<std::string> read_png_config_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("png: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::string> found;
  if (bytes.size() < 8) return found;
  size_t pos = 8;
  while (pos + 8 <= bytes.size()) {
    const uint32_t len = (static_cast<uint8_t>(bytes[pos]) << 24) |
                         (static_cast<uint8_t>(bytes[pos + 1]) << 16) |
                         (static_cast<uint8_t>(bytes[pos + 2]) << 8) |
                         static_cast<uint8_t>(bytes[pos + 3]);
    const std::string type = bytes.substr(pos + 4, 4);
    if (pos + 8 + len + 4 > bytes.size()) break;
    if (type == "tEXt") {
      const std::string data = bytes.substr(pos + 8, len);
      const size_t nul = data.find('\0');
      if (nul != std::string::npos && data.substr(0, nul) == "bgm-config")
        found.push_back(data.substr(nul + 1));
    }
    pos += 8 + len + 4;
    if (type == "IEND") break;
  }
  return found;
}

}  // namespace bgm
