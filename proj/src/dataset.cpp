// Copyright 2026 The GDCA-Tree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gdca/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include "gdca/errors.hpp"

namespace gdca {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return buf.str();
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string line_tag(std::size_t line_no) {
  return "line " + std::to_string(line_no + 1) + ": ";
}

}  // namespace

Dataset::Dataset(std::size_t d, std::vector<std::size_t> col_ptr,
                 std::vector<std::uint32_t> row_idx, std::vector<double> values,
                 std::vector<double> labels)
    : d_(d),
      col_ptr_(std::move(col_ptr)),
      row_idx_(std::move(row_idx)),
      values_(std::move(values)),
      labels_(std::move(labels)) {
  if (d_ == 0 || labels_.empty()) {
    throw ParseError("dataset must have d >= 1 and m >= 1");
  }
  if (col_ptr_.size() != labels_.size() + 1 || col_ptr_.front() != 0 ||
      col_ptr_.back() != values_.size() || row_idx_.size() != values_.size()) {
    throw ParseError("inconsistent column storage");
  }
  norms2_.resize(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = col_ptr_[i]; k < col_ptr_[i + 1]; ++k) {
      if (row_idx_[k] >= d_) throw ParseError("feature index out of range");
      s += values_[k] * values_[k];
    }
    norms2_[i] = s;
  }
}

Dataset Dataset::from_dense(std::size_t d, std::size_t m,
                            std::span<const double> features,
                            std::vector<double> labels) {
  if (features.size() != d * m || labels.size() != m) {
    throw ParseError("dense feature matrix does not match d x m");
  }
  std::vector<std::size_t> col_ptr{0};
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < d; ++r) {
      const double v = features[i * d + r];
      if (v != 0.0) {
        rows.push_back(static_cast<std::uint32_t>(r));
        values.push_back(v);
      }
    }
    col_ptr.push_back(values.size());
  }
  return Dataset(d, std::move(col_ptr), std::move(rows), std::move(values),
                 std::move(labels));
}

Dataset::Column Dataset::column(std::size_t i) const {
  const std::size_t b = col_ptr_[i];
  const std::size_t n = col_ptr_[i + 1] - b;
  return {std::span(row_idx_).subspan(b, n), std::span(values_).subspan(b, n)};
}

double Dataset::dot(std::size_t i, std::span<const double> w) const {
  double s = 0.0;
  for (std::size_t k = col_ptr_[i]; k < col_ptr_[i + 1]; ++k) {
    s += values_[k] * w[row_idx_[k]];
  }
  return s;
}

void Dataset::axpy(std::size_t i, double scale, std::span<double> w) const {
  for (std::size_t k = col_ptr_[i]; k < col_ptr_[i + 1]; ++k) {
    w[row_idx_[k]] += scale * values_[k];
  }
}

std::vector<double> Dataset::dense_column(std::size_t i) const {
  std::vector<double> x(d_, 0.0);
  axpy(i, 1.0, x);
  return x;
}

Dataset parse_dense(const std::string& text, const DenseFormat& format) {
  const auto lines = split_lines(text);
  std::size_t fields = 0;
  std::size_t m = 0;
  std::vector<double> features;
  std::vector<double> labels;
  bool header_pending = format.has_header;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = trim(lines[ln]);
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = line.find(format.delimiter, start);
      parts.push_back(line.substr(start, end == std::string_view::npos
                                             ? std::string_view::npos
                                             : end - start));
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
    if (fields == 0) {
      fields = parts.size();
      if (fields < 2) {
        throw ParseError(line_tag(ln) + "need at least one feature and a label");
      }
      if (format.label_column >= fields) {
        throw ParseError("label column " + std::to_string(format.label_column) +
                         " out of range for " + std::to_string(fields) + " fields");
      }
    } else if (parts.size() != fields) {
      throw ParseError(line_tag(ln) + "expected " + std::to_string(fields) +
                       " fields, got " + std::to_string(parts.size()));
    }
    for (std::size_t f = 0; f < fields; ++f) {
      double v = 0.0;
      if (!parse_double(parts[f], v)) {
        throw ParseError(line_tag(ln) + "malformed number '" +
                         std::string(trim(parts[f])) + "'");
      }
      if (f == format.label_column) {
        labels.push_back(v);
      } else {
        features.push_back(v);
      }
    }
    ++m;
  }
  if (m == 0) throw ParseError("no data rows");
  return Dataset::from_dense(fields - 1, m, features, std::move(labels));
}

Dataset load_dense(const std::string& path, const DenseFormat& format) {
  return parse_dense(read_file(path), format);
}

Dataset parse_libsvm(const std::string& text, const LabelMap& label_map) {
  const auto lines = split_lines(text);
  std::vector<std::size_t> col_ptr{0};
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
  std::vector<double> labels;
  std::size_t d = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    std::istringstream tokens{std::string(line)};
    std::string tok;
    tokens >> tok;
    double label = 0.0;
    if (!parse_double(tok, label)) {
      throw ParseError(line_tag(ln) + "malformed label '" + tok + "'");
    }
    if (!label_map.empty()) {
      const auto it = label_map.find(label);
      if (it == label_map.end()) {
        throw MapError(line_tag(ln) + "label '" + tok + "' has no mapping");
      }
      label = it->second;
    }
    entries.clear();
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw ParseError(line_tag(ln) + "expected idx:val, got '" + tok + "'");
      }
      const std::string_view idx_str = std::string_view(tok).substr(0, colon);
      unsigned long idx = 0;
      const auto [ptr, ec] =
          std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
      if (ec != std::errc() || ptr != idx_str.data() + idx_str.size() || idx == 0 ||
          idx > 0xffffffffUL) {
        throw ParseError(line_tag(ln) + "bad feature index in '" + tok + "'");
      }
      double v = 0.0;
      if (!parse_double(std::string_view(tok).substr(colon + 1), v)) {
        throw ParseError(line_tag(ln) + "bad feature value in '" + tok + "'");
      }
      entries.emplace_back(static_cast<std::uint32_t>(idx - 1), v);
    }
    std::sort(entries.begin(), entries.end());
    for (std::size_t k = 1; k < entries.size(); ++k) {
      if (entries[k].first == entries[k - 1].first) {
        throw ParseError(line_tag(ln) + "duplicate feature index " +
                         std::to_string(entries[k].first + 1));
      }
    }
    for (const auto& [r, v] : entries) {
      d = std::max<std::size_t>(d, r + 1);
      if (v == 0.0) continue;
      rows.push_back(r);
      values.push_back(v);
    }
    col_ptr.push_back(values.size());
    labels.push_back(label);
  }
  if (labels.empty()) throw ParseError("no data lines");
  return Dataset(std::max<std::size_t>(d, 1), std::move(col_ptr), std::move(rows),
                 std::move(values), std::move(labels));
}

Dataset load_libsvm(const std::string& path, const LabelMap& label_map) {
  return parse_libsvm(read_file(path), label_map);
}

NormalizeMode normalize_mode_from_name(const std::string& name) {
  if (name == "per_instance_unit") return NormalizeMode::kPerInstanceUnit;
  if (name == "cap_at_one") return NormalizeMode::kCapAtOne;
  throw ConfigError("unknown normalize mode '" + name +
                    "' (expected per_instance_unit or cap_at_one)");
}

Dataset normalize(const Dataset& ds, NormalizeMode mode) {
  std::vector<std::size_t> col_ptr{0};
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
  rows.reserve(ds.nnz());
  values.reserve(ds.nnz());
  for (std::size_t i = 0; i < ds.m(); ++i) {
    const double norm = std::sqrt(ds.squared_norm(i));
    double scale = 1.0;
    if (norm > 0.0 && (mode == NormalizeMode::kPerInstanceUnit || norm > 1.0)) {
      scale = 1.0 / norm;
    }
    const auto col = ds.column(i);
    for (std::size_t k = 0; k < col.rows.size(); ++k) {
      rows.push_back(col.rows[k]);
      values.push_back(col.values[k] * scale);
    }
    col_ptr.push_back(values.size());
  }
  return Dataset(ds.d(), std::move(col_ptr), std::move(rows), std::move(values),
                 std::vector<double>(ds.labels().begin(), ds.labels().end()));
}

const std::vector<std::size_t>& Partition::block(NodeId leaf) const {
  const auto it = blocks.find(leaf);
  if (it == blocks.end()) {
    throw UnknownNode("no partition block for node " + std::to_string(leaf.value));
  }
  return it->second;
}

std::size_t Partition::total_size() const {
  std::size_t n = 0;
  for (const auto& [id, b] : blocks) n += b.size();
  return n;
}

Partition partition_by_fractions(std::size_t m, std::span<const double> fractions,
                                 std::span<const NodeId> leaf_ids,
                                 std::uint64_t seed) {
  if (fractions.empty() || fractions.size() != leaf_ids.size()) {
    throw ConfigError("need one fraction per leaf (" + std::to_string(leaf_ids.size()) +
                      " leaves, " + std::to_string(fractions.size()) + " fractions)");
  }
  double sum = 0.0;
  for (const double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("fractions must sum to 1 (got " + std::to_string(sum) + ")");
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Partition p;
  std::size_t start = 0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    std::size_t size = 0;
    if (k + 1 == fractions.size()) {
      size = m - start;
    } else {
      // The epsilon keeps products like 0.3 * 10 = 3.0000000000000004 or
      // 0.29 * 100 = 28.999999999999996 on their intended integer.
      size = static_cast<std::size_t>(
          std::floor(fractions[k] * static_cast<double>(m) + 1e-9));
      size = std::min(size, m - start);
    }
    std::vector<std::size_t> block(order.begin() + start, order.begin() + start + size);
    std::sort(block.begin(), block.end());
    if (!p.blocks.emplace(leaf_ids[k], std::move(block)).second) {
      throw ConfigError("duplicate leaf id " + std::to_string(leaf_ids[k].value));
    }
    start += size;
  }
  return p;
}

Partition partition_by_fractions(const Dataset& ds, std::span<const double> fractions,
                                 std::span<const NodeId> leaf_ids,
                                 std::uint64_t seed) {
  return partition_by_fractions(ds.m(), fractions, leaf_ids, seed);
}

void validate_partition(const Partition& partition, std::size_t m) {
  std::vector<char> seen(m, 0);
  std::size_t count = 0;
  for (const auto& [id, block] : partition.blocks) {
    for (const std::size_t i : block) {
      if (i >= m) throw ConfigError("partition index out of range");
      if (seen[i]) throw ConfigError("partition blocks overlap at index " + std::to_string(i));
      seen[i] = 1;
      ++count;
    }
  }
  if (count != m) throw ConfigError("partition does not cover every data index");
}

}  // namespace gdca
