#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "otmedian/experiments.hpp"

namespace otmedian::io {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // 2049

struct IdxHeader {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
};

/// Raw bytes of a file; gzip files (1f 8b) are decompressed transparently.
std::vector<std::uint8_t> read_file_bytes(const std::string& path);

/// Parses the IDX header and checks that the payload length matches the
/// declared dimensions exactly.
IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes);

std::vector<ByteImage> parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);
std::vector<ByteImage> read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);

/// Encodes images or labels as IDX (used for fixtures and exports).
std::vector<std::uint8_t> encode_idx_images(const std::vector<ByteImage>& images);
std::vector<std::uint8_t> encode_idx_labels(const std::vector<std::uint8_t>& labels);

/// CSV with header k,sample_size,replicate,error_median,error_barycenter;
/// reals at 12 significant digits, rows in canonical order.
std::string format_sweep_csv(const SweepResult& result);
void write_sweep_csv(const SweepResult& result, const std::string& path);
SweepResult parse_sweep_csv(const std::string& text);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

std::string render_line_plot_svg(const std::vector<Series>& series,
                                 const std::string& title = {},
                                 const std::string& x_label = {},
                                 const std::string& y_label = {});
void emit_line_plot_svg(const std::vector<Series>& series, const std::string& path,
                        const std::string& title = {}, const std::string& x_label = {},
                        const std::string& y_label = {});

/// Grayscale grid of grid measures (each rescaled to its own maximum).
/// `rows` holds one row of panels per entry.
std::string render_image_grid_svg(const std::vector<std::vector<GridMeasure>>& rows,
                                  const std::vector<std::string>& row_labels);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace otmedian::io
