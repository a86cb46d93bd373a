#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mandera {

/// One epoch of per-node gradient messages: n rows (one per node), p columns
/// (one per model parameter). Row i belongs to node node_ids[i] for the whole
/// epoch. Entries must be finite; factory functions and loaders enforce this.
struct MessageMatrix {
  int n = 0;
  std::int64_t p = 0;
  std::vector<double> values;         // row-major, n*p
  std::vector<std::int64_t> node_ids; // size n

  MessageMatrix() = default;
  MessageMatrix(int n_, std::int64_t p_);

  double& at(int i, std::int64_t j) { return values[static_cast<std::size_t>(i) * p + j]; }
  double at(int i, std::int64_t j) const { return values[static_cast<std::size_t>(i) * p + j]; }
  std::span<double> row(int i) { return {values.data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p)}; }
  std::span<const double> row(int i) const { return {values.data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p)}; }
};

/// Builds a validated matrix from row-major data. Throws std::invalid_argument
/// on shape errors or any non-finite entry (the message names row/column).
MessageMatrix make_matrix(int n, std::int64_t p, std::vector<double> values,
                          std::vector<std::int64_t> node_ids = {});

/// Throws std::invalid_argument if any entry is non-finite or shape is bad.
void validate_matrix(const MessageMatrix& m);

/// Column-concatenation of several epochs. All matrices must share n and
/// node_ids (same row-to-node correspondence).
MessageMatrix concat_epochs(std::span<const MessageMatrix> epochs);

/// FNV-1a 64-bit digest over the raw value bytes, as fixed-width hex.
std::string matrix_digest(const MessageMatrix& m);

// Binary format: 16-byte header (magic "MNDM", u32 n, u32 p, u32 reserved),
// then n*p little-endian f64, row-major.
void save_matrix_binary(const MessageMatrix& m, const std::string& path);
MessageMatrix load_matrix_binary(const std::string& path);

// CSV format: header "node_id,g_0,...,g_{p-1}", one row per node, %.17g.
void save_matrix_csv(const MessageMatrix& m, const std::string& path);
MessageMatrix load_matrix_csv(const std::string& path);

/// Loads either format, picking by the MNDM magic.
MessageMatrix load_matrix_any(const std::string& path);

}  // namespace mandera
