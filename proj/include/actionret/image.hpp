#ifndef ACTIONRET_IMAGE_HPP
#define ACTIONRET_IMAGE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace actionret {

// RGB image with float channels in [0,1], planar CHW layout so it converts
// to a network input tensor without shuffling.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // [3, height, width]

  Image() = default;
  Image(int w, int h) : width(w), height(h), data(static_cast<size_t>(3) * w * h, 0.0f) {}

  float& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }

  void fill(float r, float g, float b);
};

// Binary PPM (P6, 8-bit). Write is byte-deterministic for identical pixels.
void write_ppm(const Image& img, const std::string& path);
Image read_ppm(const std::string& path);

Image resize_bilinear(const Image& src, int out_w, int out_h);
Image hflip(const Image& src);
Image crop(const Image& src, int x0, int y0, int w, int h);

void fill_rect(Image& img, int x0, int y0, int x1, int y1, float r, float g, float b);
void draw_border(Image& img, int thickness, float r, float g, float b);

// 5x7 bitmap text (digits, lowercase letters, '_', '-', '.'), scaled by
// `scale`; unknown characters render as blanks.
void draw_text(Image& img, const std::string& text, int x, int y, int scale,
               float r, float g, float b);

}  // namespace actionret

#endif  // ACTIONRET_IMAGE_HPP
