#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include <zlib.h>

#include "otmedian/errors.hpp"
#include "otmedian/io.hpp"

namespace otmedian::io {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> gunzip(const std::string& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> out;
  std::uint8_t buffer[1 << 16];
  int got = 0;
  while ((got = gzread(file, buffer, sizeof buffer)) > 0) out.insert(out.end(), buffer, buffer + got);
  const bool failed = got < 0;
  gzclose(file);
  if (failed) throw IoError("corrupt gzip stream in '" + path + "'");
  return out;
}

std::size_t header_length(const IdxHeader& h) { return 4 + 4 * h.dims.size(); }

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(path);
  return bytes;
}

IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw ParseError("idx: truncated magic number", 0);
  IdxHeader h;
  h.magic = read_be32(bytes, 0);
  // Only unsigned-byte images (rank 3) and labels (rank 1) are accepted.
  if (h.magic != kIdxImageMagic && h.magic != kIdxLabelMagic)
    throw ParseError("idx: bad magic number " + std::to_string(h.magic) +
                         " (expected 2051 or 2049)",
                     0);
  const std::size_t ndim = bytes[3];
  if (bytes.size() < 4 + 4 * ndim) throw ParseError("idx: truncated dimension list", bytes.size());
  std::uint64_t payload = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    const std::uint32_t dim = read_be32(bytes, 4 + 4 * i);
    h.dims.push_back(dim);
    if (dim != 0 && payload > std::numeric_limits<std::uint64_t>::max() / dim)
      throw ParseError("idx: dimension product overflows", 4 + 4 * i);
    payload *= dim;
  }
  const std::size_t header = header_length(h);
  const std::uint64_t available = bytes.size() - header;
  if (payload > available) throw ParseError("idx: truncated payload", bytes.size());
  if (payload < available) throw ParseError("idx: trailing bytes after payload", header + payload);
  return h;
}

std::vector<ByteImage> parse_idx_images(std::span<const std::uint8_t> bytes) {
  const IdxHeader h = parse_idx_header(bytes);
  if (h.magic != kIdxImageMagic || h.dims.size() != 3)
    throw ParseError("idx: not an image file (expected magic 2051)", 0);
  const std::size_t count = h.dims[0], rows = h.dims[1], cols = h.dims[2];
  if ((rows == 0 || cols == 0) && count != 0)
    throw ParseError("idx: zero-sized image dimension", rows == 0 ? 8 : 12);
  std::vector<ByteImage> images;
  images.reserve(count);
  std::size_t offset = header_length(h);
  for (std::size_t i = 0; i < count; ++i) {
    ByteImage img{rows, cols, {}};
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                      bytes.begin() + static_cast<std::ptrdiff_t>(offset + rows * cols));
    offset += rows * cols;
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  const IdxHeader h = parse_idx_header(bytes);
  if (h.magic != kIdxLabelMagic || h.dims.size() != 1)
    throw ParseError("idx: not a label file (expected magic 2049)", 0);
  return {bytes.begin() + static_cast<std::ptrdiff_t>(header_length(h)), bytes.end()};
}

std::vector<ByteImage> read_idx_images(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_idx_images(bytes);
  } catch (const ParseError& e) {
    throw ParseError("'" + path + "': " + e.what(), e.offset());
  }
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_idx_labels(bytes);
  } catch (const ParseError& e) {
    throw ParseError("'" + path + "': " + e.what(), e.offset());
  }
}

std::vector<std::uint8_t> encode_idx_images(const std::vector<ByteImage>& images) {
  std::vector<std::uint8_t> out;
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(images.size()));
  write_be32(out, static_cast<std::uint32_t>(images.empty() ? 0 : images.front().rows));
  write_be32(out, static_cast<std::uint32_t>(images.empty() ? 0 : images.front().cols));
  for (const auto& img : images) out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

}  // namespace otmedian::io
