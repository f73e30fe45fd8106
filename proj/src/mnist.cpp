#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "otmedian/errors.hpp"
#include "otmedian/experiments.hpp"
#include "otmedian/io.hpp"

namespace otmedian {

GridMeasure byte_image_measure(const ByteImage& image) {
  if (image.pixels.size() != image.rows * image.cols)
    throw InvalidInput("image: pixel count does not match dimensions");
  std::vector<std::vector<double>> pixels(image.rows, std::vector<double>(image.cols));
  for (std::size_t r = 0; r < image.rows; ++r)
    for (std::size_t c = 0; c < image.cols; ++c)
      pixels[r][c] = image.pixels[r * image.cols + c] / 255.0;
  return normalize_image(pixels);
}

std::vector<DigitCentroids> mnist_centroids(const std::vector<ByteImage>& images,
                                            const std::vector<std::uint8_t>& labels,
                                            std::size_t per_digit, const MnistConfig& cfg,
                                            unsigned threads) {
  if (per_digit == 0) throw InvalidInput("mnist: per_digit must be >= 1");
  if (images.size() != labels.size())
    throw InvalidInput("mnist: image and label counts differ (" +
                       std::to_string(images.size()) + " vs " +
                       std::to_string(labels.size()) + ")");
  std::vector<std::vector<GridMeasure>> by_digit(10);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto label = labels[i];
    if (label > 9) throw InvalidInput("mnist: label out of range at index " + std::to_string(i));
    if (by_digit[label].size() < per_digit) by_digit[label].push_back(byte_image_measure(images[i]));
  }
  for (int d = 0; d < 10; ++d)
    if (by_digit[d].size() < per_digit)
      throw InvalidInput("mnist: only " + std::to_string(by_digit[d].size()) +
                         " images for digit " + std::to_string(d));

  std::vector<std::optional<DigitCentroids>> out(10);
  parallel_for(10, threads, [&](std::size_t d) {
    const auto& ms = by_digit[d];
    const SimplexWeights uniform = SimplexWeights::uniform(ms.size());
    std::vector<double> mean(ms.front().size(), 0.0);
    for (const auto& m : ms)
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += m.mass()[i];
    for (double& v : mean) v /= static_cast<double>(ms.size());

    GridSpace space(ms.front(), cfg.sinkhorn, cfg.grid);
    auto median = irls_median(space, ms, uniform, cfg.irls);
    GridMeasure barycenter =
        ms.size() == 1 ? ms.front() : bary_grid(uniform, ms, cfg.grid);
    out[d].emplace(DigitCentroids{static_cast<int>(d), ms.size(),
                                  GridMeasure(ms.front().shape(), ms.front().axes(), std::move(mean)),
                                  std::move(barycenter), std::move(median.centroid),
                                  median.termination});
  });
  std::vector<DigitCentroids> result;
  for (auto& c : out) result.push_back(std::move(*c));
  return result;
}

std::vector<DigitCentroids> run_mnist(const std::string& images_path,
                                      const std::string& labels_path, std::size_t per_digit,
                                      const MnistConfig& cfg, unsigned threads) {
  return mnist_centroids(io::read_idx_images(images_path), io::read_idx_labels(labels_path),
                         per_digit, cfg, threads);
}

void synthetic_blob_digits(std::size_t per_digit, std::size_t side, Rng& rng,
                           std::vector<ByteImage>& images, std::vector<std::uint8_t>& labels) {
  const double s = static_cast<double>(side);
  constexpr double kPi = 3.14159265358979323846;
  for (std::size_t i = 0; i < per_digit; ++i) {
    for (int digit = 0; digit < 10; ++digit) {
      // Two blobs placed symmetrically about the centre; the class fixes
      // the orientation of the pair.
      const double angle = kPi * digit / 10.0;
      const double radius = 0.22 * s;
      ByteImage img{side, side, std::vector<std::uint8_t>(side * side, 0)};
      std::vector<double> field(side * side, 0.0);
      for (int blob = 0; blob < 2; ++blob) {
        const double sign = blob == 0 ? 1.0 : -1.0;
        const double cy = 0.5 * s + sign * radius * std::sin(angle) + 0.06 * s * rng.normal();
        const double cx = 0.5 * s + sign * radius * std::cos(angle) + 0.06 * s * rng.normal();
        const double width = 0.06 * s * (1.0 + 0.2 * rng.normal());
        const double sigma2 = std::max(0.5, width * width);
        for (std::size_t r = 0; r < side; ++r)
          for (std::size_t c = 0; c < side; ++c) {
            const double dy = r + 0.5 - cy, dx = c + 0.5 - cx;
            field[r * side + c] += std::exp(-0.5 * (dx * dx + dy * dy) / sigma2);
          }
      }
      for (std::size_t p = 0; p < field.size(); ++p) {
        const double v = std::min(1.0, field[p]);
        img.pixels[p] = static_cast<std::uint8_t>(v < 0.1 ? 0 : std::lround(255.0 * v));
      }
      images.push_back(std::move(img));
      labels.push_back(static_cast<std::uint8_t>(digit));
    }
  }
}

}  // namespace otmedian
