#include "mandera/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mandera/report.hpp"

namespace mandera {

namespace {

std::vector<std::int64_t> default_ids(int n) {
  std::vector<std::int64_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

constexpr char kMagic[4] = {'M', 'N', 'D', 'M'};

}  // namespace

MessageMatrix::MessageMatrix(int n_, std::int64_t p_)
    : n(n_), p(p_), values(static_cast<std::size_t>(n_) * p_, 0.0), node_ids(default_ids(n_)) {}

void validate_matrix(const MessageMatrix& m) {
  if (m.n < 2 || m.p < 1)
    throw std::invalid_argument("message matrix needs n >= 2 and p >= 1, got n=" +
                                std::to_string(m.n) + " p=" + std::to_string(m.p));
  if (m.values.size() != static_cast<std::size_t>(m.n) * m.p)
    throw std::invalid_argument("message matrix value count does not match n*p");
  if (m.node_ids.size() != static_cast<std::size_t>(m.n))
    throw std::invalid_argument("message matrix node_ids size does not match n");
  for (std::size_t idx = 0; idx < m.values.size(); ++idx) {
    if (!std::isfinite(m.values[idx])) {
      std::int64_t row = static_cast<std::int64_t>(idx) / m.p;
      std::int64_t col = static_cast<std::int64_t>(idx) % m.p;
      throw std::invalid_argument("non-finite entry at row " + std::to_string(row) +
                                  ", column " + std::to_string(col));
    }
  }
}

MessageMatrix make_matrix(int n, std::int64_t p, std::vector<double> values,
                          std::vector<std::int64_t> node_ids) {
  MessageMatrix m;
  m.n = n;
  m.p = p;
  m.values = std::move(values);
  m.node_ids = node_ids.empty() ? default_ids(n) : std::move(node_ids);
  validate_matrix(m);
  return m;
}

MessageMatrix concat_epochs(std::span<const MessageMatrix> epochs) {
  if (epochs.empty()) throw std::invalid_argument("concat_epochs: no matrices given");
  const MessageMatrix& first = epochs[0];
  std::int64_t total_p = 0;
  for (const auto& m : epochs) {
    if (m.n != first.n)
      throw std::invalid_argument("concat_epochs: node count mismatch (" +
                                  std::to_string(m.n) + " vs " + std::to_string(first.n) + ")");
    if (m.node_ids != first.node_ids)
      throw std::invalid_argument("concat_epochs: node id mismatch between epochs");
    total_p += m.p;
  }
  MessageMatrix out;
  out.n = first.n;
  out.p = total_p;
  out.node_ids = first.node_ids;
  out.values.resize(static_cast<std::size_t>(out.n) * total_p);
  for (int i = 0; i < out.n; ++i) {
    double* dst = out.values.data() + static_cast<std::size_t>(i) * total_p;
    for (const auto& m : epochs) {
      std::memcpy(dst, m.values.data() + static_cast<std::size_t>(i) * m.p,
                  static_cast<std::size_t>(m.p) * sizeof(double));
      dst += m.p;
    }
  }
  return out;
}

std::string matrix_digest(const MessageMatrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(m.values.data());
  std::size_t len = m.values.size() * sizeof(double);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_matrix_binary(const MessageMatrix& m, const std::string& path) {
  validate_matrix(m);
  std::string blob;
  blob.reserve(16 + m.values.size() * sizeof(double));
  blob.append(kMagic, 4);
  std::uint32_t header[3] = {static_cast<std::uint32_t>(m.n), static_cast<std::uint32_t>(m.p), 0};
  blob.append(reinterpret_cast<const char*>(header), sizeof(header));
  blob.append(reinterpret_cast<const char*>(m.values.data()),
              m.values.size() * sizeof(double));
  write_file_atomic(path, blob);
}

MessageMatrix load_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  std::uint32_t header[3];
  if (!in.read(magic, 4) || !in.read(reinterpret_cast<char*>(header), sizeof(header)))
    throw std::runtime_error(path + ": truncated header (need 16 bytes)");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": bad magic, expected MNDM");
  int n = static_cast<int>(header[0]);
  std::int64_t p = header[1];
  MessageMatrix m;
  m.n = n;
  m.p = p;
  m.node_ids = default_ids(n);
  m.values.resize(static_cast<std::size_t>(n) * p);
  std::size_t want = m.values.size() * sizeof(double);
  if (!in.read(reinterpret_cast<char*>(m.values.data()), static_cast<std::streamsize>(want))) {
    std::size_t got = static_cast<std::size_t>(in.gcount());
    throw std::runtime_error(path + ": truncated payload, expected " + std::to_string(want) +
                             " bytes, got " + std::to_string(got));
  }
  validate_matrix(m);
  return m;
}

void save_matrix_csv(const MessageMatrix& m, const std::string& path) {
  validate_matrix(m);
  std::string out;
  out += "node_id";
  for (std::int64_t j = 0; j < m.p; ++j) out += ",g_" + std::to_string(j);
  out += "\n";
  for (int i = 0; i < m.n; ++i) {
    out += std::to_string(m.node_ids[i]);
    for (std::int64_t j = 0; j < m.p; ++j) {
      out += ',';
      out += format_double(m.at(i, j));
    }
    out += "\n";
  }
  write_file_atomic(path, out);
}

MessageMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error(path + ": empty file");
  if (header.rfind("node_id", 0) != 0)
    throw std::runtime_error(path + ": expected header starting with node_id");
  std::int64_t p = std::count(header.begin(), header.end(), ',');
  if (p < 1) throw std::runtime_error(path + ": header has no gradient columns");
  MessageMatrix m;
  m.p = p;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* s = line.c_str();
    char* end = nullptr;
    m.node_ids.push_back(std::strtoll(s, &end, 10));
    for (std::int64_t j = 0; j < p; ++j) {
      if (*end != ',')
        throw std::runtime_error(path + ": row " + std::to_string(m.n) + " has fewer than " +
                                 std::to_string(p) + " values");
      s = end + 1;
      m.values.push_back(std::strtod(s, &end));
    }
    ++m.n;
  }
  validate_matrix(m);
  return m;
}

MessageMatrix load_matrix_any(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.close();
  if (std::memcmp(magic, kMagic, 4) == 0) return load_matrix_binary(path);
  return load_matrix_csv(path);
}

}  // namespace mandera
