#pragma once

#include <span>
#include <vector>

#include "seco/error.hpp"

namespace seco {

/// Mask label for cells that carry no supervision signal.
inline constexpr int kIgnoreLabel = -1;

/// H x W grid with one D-dimensional feature vector per cell.
struct FeatureGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;  // (row * width + col) * channels + channel

  FeatureGrid() = default;
  FeatureGrid(int h, int w, int d)
      : height(h), width(w), channels(d),
        data(static_cast<std::size_t>(h) * w * d, 0.0) {}

  int cells() const { return height * width; }

  std::span<double> cell(int r, int c) {
    return {data.data() + (static_cast<std::size_t>(r) * width + c) * channels,
            static_cast<std::size_t>(channels)};
  }
  std::span<const double> cell(int r, int c) const {
    return {data.data() + (static_cast<std::size_t>(r) * width + c) * channels,
            static_cast<std::size_t>(channels)};
  }
};

/// Nonnegative activation score per (class, cell); classes are 1..K.
struct CamGrid {
  int height = 0;
  int width = 0;
  int classes = 0;
  std::vector<double> data;

  CamGrid() = default;
  CamGrid(int h, int w, int k)
      : height(h), width(w), classes(k),
        data(static_cast<std::size_t>(h) * w * k, 0.0) {}

  double& score(int cls, int r, int c) {
    return data[(static_cast<std::size_t>(cls - 1) * height + r) * width + c];
  }
  double score(int cls, int r, int c) const {
    return data[(static_cast<std::size_t>(cls - 1) * height + r) * width + c];
  }
};

/// Per-cell labels: 0 background, 1..K foreground classes, kIgnoreLabel.
struct PseudoMask {
  int height = 0;
  int width = 0;
  std::vector<int> labels;  // row * width + col

  PseudoMask() = default;
  PseudoMask(int h, int w, int fill = 0)
      : height(h), width(w), labels(static_cast<std::size_t>(h) * w, fill) {}

  int& at(int r, int c) { return labels[static_cast<std::size_t>(r) * width + c]; }
  int at(int r, int c) const { return labels[static_cast<std::size_t>(r) * width + c]; }
};

}  // namespace seco
