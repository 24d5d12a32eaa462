#pragma once

// Dataset ingestion from CSV text and IDX (MNIST layout) files. Errors carry
// the byte offset in the offending file; nothing partial is returned.

#include <charconv>
#include <cmath>
#include <cstring>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "symlat/csv.hpp"
#include "symlat/dataset.hpp"
#include "symlat/error.hpp"

namespace symlat::experiments {

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(0, "cannot open '" + path + "'");
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Header row of column names, then numeric rows. The last column is the
/// response; the rest are features in header order.
inline RegressionDataset parse_csv_dataset(const std::string& text) {
  std::size_t pos = 0;
  auto next_line = [&](std::size_t& start) -> std::optional<std::string> {
    while (pos < text.size()) {
      start = pos;
      auto end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(pos, end - pos);
      pos = end + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    return std::nullopt;
  };
  std::size_t start = 0;
  auto header_line = next_line(start);
  if (!header_line) throw DataError(0, "CSV is empty; expected a header row");
  std::vector<std::string> header;
  try {
    header = split_csv_record(*header_line);
  } catch (const ArgumentError& e) {
    throw DataError(start, e.what());
  }
  if (header.size() < 2) throw DataError(start, "header needs at least one feature column and a response column");
  for (const auto& h : header)
    if (h.empty()) throw DataError(start, "header has an empty column name");
  const std::size_t d = header.size() - 1;
  std::vector<double> x, y;
  while (auto line = next_line(start)) {
    std::size_t cell_start = start;
    std::size_t col = 0;
    std::size_t k = 0;
    const std::string& s = *line;
    while (true) {
      const auto comma = s.find(',', k);
      const std::size_t end = comma == std::string::npos ? s.size() : comma;
      std::size_t b = k, e = end;
      while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
      while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
      if (col >= header.size())
        throw DataError(cell_start + k, "row has more than " + std::to_string(header.size()) + " cells");
      double v = 0;
      auto [p, ec] = std::from_chars(s.data() + b, s.data() + e, v);
      if (b == e || ec != std::errc() || p != s.data() + e || !std::isfinite(v))
        throw DataError(cell_start + b, "non-numeric cell '" + s.substr(k, end - k) + "' in column " + std::to_string(col + 1));
      (col < d ? x : y).push_back(v);
      ++col;
      if (comma == std::string::npos) break;
      k = comma + 1;
    }
    if (col != header.size())
      throw DataError(start, "row has " + std::to_string(col) + " cells, expected " + std::to_string(header.size()));
  }
  if (y.size() < 2) throw DataError(text.size(), "CSV needs at least two data rows");
  return RegressionDataset(std::move(x), std::move(y), d);
}

inline RegressionDataset read_csv_dataset(const std::string& path) { return parse_csv_dataset(read_file_bytes(path)); }

struct IdxArray {
  std::uint8_t type = 0x08;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

/// Big-endian IDX: two zero bytes, a type byte, a dimension count, the
/// dimensions as u32, then the data. `scale_bytes` maps unsigned bytes to
/// [0, 1].
inline IdxArray parse_idx(const std::string& bytes, bool scale_bytes) {
  auto u8 = [&](std::size_t at) { return static_cast<std::uint8_t>(bytes[at]); };
  if (bytes.size() < 4) throw DataError(bytes.size(), "truncated IDX magic number");
  if (u8(0) != 0 || u8(1) != 0) throw DataError(0, "bad IDX magic: first two bytes must be zero");
  IdxArray a;
  a.type = u8(2);
  std::size_t width = 0;
  switch (a.type) {
    case 0x08: case 0x09: width = 1; break;
    case 0x0B: width = 2; break;
    case 0x0C: case 0x0D: width = 4; break;
    case 0x0E: width = 8; break;
    default: throw DataError(2, "unknown IDX element type " + std::to_string(a.type));
  }
  const std::size_t ndims = u8(3);
  if (ndims == 0) throw DataError(3, "IDX file has no dimensions");
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) throw DataError(bytes.size(), "truncated IDX dimension list");
  std::size_t count = 1;
  for (std::size_t k = 0; k < ndims; ++k) {
    const std::size_t at = 4 + 4 * k;
    const std::uint32_t v = (std::uint32_t(u8(at)) << 24) | (std::uint32_t(u8(at + 1)) << 16) |
                            (std::uint32_t(u8(at + 2)) << 8) | std::uint32_t(u8(at + 3));
    a.dims.push_back(v);
    count *= v;
  }
  const std::size_t expected = header + count * width;
  if (bytes.size() < expected)
    throw DataError(bytes.size(), "truncated IDX data: expected " + std::to_string(expected) + " bytes, file has " +
                                      std::to_string(bytes.size()));
  if (bytes.size() > expected) throw DataError(expected, "trailing bytes after IDX data");
  a.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = header + i * width;
    std::uint64_t raw = 0;
    for (std::size_t b = 0; b < width; ++b) raw = (raw << 8) | u8(at + b);
    double v = 0;
    switch (a.type) {
      case 0x08: v = scale_bytes ? static_cast<double>(raw) / 255.0 : static_cast<double>(raw); break;
      case 0x09: v = static_cast<std::int8_t>(raw); break;
      case 0x0B: v = static_cast<std::int16_t>(raw); break;
      case 0x0C: v = static_cast<std::int32_t>(raw); break;
      case 0x0D: {
        const auto bits = static_cast<std::uint32_t>(raw);
        float f;
        std::memcpy(&f, &bits, 4);
        v = f;
        break;
      }
      default: {
        double f;
        std::memcpy(&f, &raw, 8);
        v = f;
      }
    }
    if (!std::isfinite(v)) throw DataError(at, "non-finite IDX value");
    a.values[i] = v;
  }
  return a;
}

/// Paired image and label files: images are n x (any dims), labels are n.
/// Unsigned-byte pixels become value / 255.
inline RegressionDataset parse_idx_dataset(const std::string& image_bytes, const std::string& label_bytes) {
  IdxArray images = parse_idx(image_bytes, true);
  IdxArray labels = parse_idx(label_bytes, false);
  if (images.dims.size() < 2) throw DataError(3, "image file needs at least two dimensions");
  if (labels.dims.size() != 1) throw DataError(3, "label file must be one-dimensional");
  if (images.dims[0] != labels.dims[0])
    throw DataError(4, "label count " + std::to_string(labels.dims[0]) + " differs from image count " +
                           std::to_string(images.dims[0]));
  std::size_t d = 1;
  for (std::size_t k = 1; k < images.dims.size(); ++k) d *= images.dims[k];
  if (d == 0) throw DataError(8, "images have no pixels");
  if (labels.values.size() < 2) throw DataError(4, "need at least two images");
  return RegressionDataset(std::move(images.values), std::move(labels.values), d);
}

inline RegressionDataset read_idx_dataset(const std::string& images_path, const std::string& labels_path) {
  return parse_idx_dataset(read_file_bytes(images_path), read_file_bytes(labels_path));
}

}  // namespace symlat::experiments
