#include "actionret/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace actionret {

namespace {

inline uint8_t to_byte(float v) {
  float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(c * 255.0f));
}

}  // namespace

void Image::fill(float r, float g, float b) {
  size_t plane = static_cast<size_t>(width) * height;
  std::fill(data.begin(), data.begin() + plane, r);
  std::fill(data.begin() + plane, data.begin() + 2 * plane, g);
  std::fill(data.begin() + 2 * plane, data.end(), b);
}

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_ppm: cannot open " + path);
  f << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      row[3 * x + 0] = to_byte(img.at(0, y, x));
      row[3 * x + 1] = to_byte(img.at(1, y, x));
      row[3 * x + 2] = to_byte(img.at(2, y, x));
    }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw std::runtime_error("write_ppm: write failed for " + path);
}

Image read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_ppm: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P6") throw std::runtime_error("read_ppm: not a P6 file: " + path);
  auto next_token = [&f, &path]() {
    // skip whitespace and '#' comments
    int v;
    for (;;) {
      int c = f.peek();
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(c)) {
        f.get();
      } else {
        break;
      }
    }
    if (!(f >> v)) throw std::runtime_error("read_ppm: bad header in " + path);
    return v;
  };
  int w = next_token();
  int h = next_token();
  int maxval = next_token();
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw std::runtime_error("read_ppm: unsupported header in " + path);
  }
  f.get();  // single whitespace after maxval
  std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (f.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw std::runtime_error("read_ppm: truncated pixel data in " + path);
  }
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t off = (static_cast<size_t>(y) * w + x) * 3;
      img.at(0, y, x) = raw[off + 0] / 255.0f;
      img.at(1, y, x) = raw[off + 1] / 255.0f;
      img.at(2, y, x) = raw[off + 2] / 255.0f;
    }
  }
  return img;
}

Image resize_bilinear(const Image& src, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("resize_bilinear: bad output size");
  if (out_w == src.width && out_h == src.height) return src;
  Image dst(out_w, out_h);
  float sx = static_cast<float>(src.width) / out_w;
  float sy = static_cast<float>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    float fy = (y + 0.5f) * sy - 0.5f;
    int y0 = static_cast<int>(std::floor(fy));
    float wy = fy - y0;
    int y1 = std::min(y0 + 1, src.height - 1);
    y0 = std::clamp(y0, 0, src.height - 1);
    for (int x = 0; x < out_w; ++x) {
      float fx = (x + 0.5f) * sx - 0.5f;
      int x0 = static_cast<int>(std::floor(fx));
      float wx = fx - x0;
      int x1 = std::min(x0 + 1, src.width - 1);
      x0 = std::clamp(x0, 0, src.width - 1);
      for (int c = 0; c < 3; ++c) {
        float top = src.at(c, y0, x0) * (1.0f - wx) + src.at(c, y0, x1) * wx;
        float bot = src.at(c, y1, x0) * (1.0f - wx) + src.at(c, y1, x1) * wx;
        dst.at(c, y, x) = top * (1.0f - wy) + bot * wy;
      }
    }
  }
  return dst;
}

Image hflip(const Image& src) {
  Image dst(src.width, src.height);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < src.height; ++y) {
      for (int x = 0; x < src.width; ++x) {
        dst.at(c, y, x) = src.at(c, y, src.width - 1 - x);
      }
    }
  }
  return dst;
}

Image crop(const Image& src, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > src.width || y0 + h > src.height) {
    throw std::invalid_argument("crop: rectangle outside image");
  }
  Image dst(w, h);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        dst.at(c, y, x) = src.at(c, y0 + y, x0 + x);
      }
    }
  }
  return dst;
}

void fill_rect(Image& img, int x0, int y0, int x1, int y1, float r, float g, float b) {
  x0 = std::clamp(x0, 0, img.width);
  x1 = std::clamp(x1, 0, img.width);
  y0 = std::clamp(y0, 0, img.height);
  y1 = std::clamp(y1, 0, img.height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      img.at(0, y, x) = r;
      img.at(1, y, x) = g;
      img.at(2, y, x) = b;
    }
  }
}

void draw_border(Image& img, int thickness, float r, float g, float b) {
  fill_rect(img, 0, 0, img.width, thickness, r, g, b);
  fill_rect(img, 0, img.height - thickness, img.width, img.height, r, g, b);
  fill_rect(img, 0, 0, thickness, img.height, r, g, b);
  fill_rect(img, img.width - thickness, 0, img.width, img.height, r, g, b);
}

namespace {

// 5x7 glyphs, one byte per row, low 5 bits used (MSB of the 5 = left pixel).
struct Glyph {
  char ch;
  std::array<uint8_t, 7> rows;
};

constexpr Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'a', {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
    {'b', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1E}},
    {'c', {0x00, 0x00, 0x0E, 0x10, 0x10, 0x11, 0x0E}},
    {'d', {0x01, 0x01, 0x0D, 0x13, 0x11, 0x11, 0x0F}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
    {'f', {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08}},
    {'g', {0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
    {'h', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'i', {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E}},
    {'j', {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C}},
    {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
    {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'m', {0x00, 0x00, 0x1A, 0x15, 0x15, 0x11, 0x11}},
    {'n', {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'o', {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E}},
    {'p', {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10}},
    {'q', {0x00, 0x00, 0x0D, 0x13, 0x0F, 0x01, 0x01}},
    {'r', {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10}},
    {'s', {0x00, 0x00, 0x0E, 0x10, 0x0E, 0x01, 0x1E}},
    {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
    {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D}},
    {'v', {0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'w', {0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0A}},
    {'x', {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
    {'y', {0x00, 0x00, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
    {'z', {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
    {'-', {0x00, 0x00, 0x00, 0x0E, 0x00, 0x00, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
};

const Glyph* find_glyph(char c) {
  if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  for (const Glyph& g : kFont) {
    if (g.ch == c) return &g;
  }
  return nullptr;
}

}  // namespace

void draw_text(Image& img, const std::string& text, int x, int y, int scale,
               float r, float g, float b) {
  int cx = x;
  for (char c : text) {
    const Glyph* glyph = find_glyph(c);
    if (glyph) {
      for (int row = 0; row < 7; ++row) {
        for (int col = 0; col < 5; ++col) {
          if (glyph->rows[row] & (1 << (4 - col))) {
            fill_rect(img, cx + col * scale, y + row * scale, cx + (col + 1) * scale,
                      y + (row + 1) * scale, r, g, b);
          }
        }
      }
    }
    cx += 6 * scale;
  }
}

}  // namespace actionret
