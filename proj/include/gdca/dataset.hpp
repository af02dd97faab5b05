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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gdca/topology_types.hpp"

namespace gdca {

// Column-wise instance storage: column i is the feature vector x_i. Columns
// are kept in compressed sparse form so dense and sparse inputs share one
// representation. Immutable once built.
class Dataset {
 public:
  struct Column {
    std::span<const std::uint32_t> rows;
    std::span<const double> values;
  };

  Dataset() = default;
  Dataset(std::size_t d, std::vector<std::size_t> col_ptr,
          std::vector<std::uint32_t> row_idx, std::vector<double> values,
          std::vector<double> labels);

  // `features` is column-major d x m. Exact zeros are not stored.
  static Dataset from_dense(std::size_t d, std::size_t m,
                            std::span<const double> features,
                            std::vector<double> labels);

  std::size_t d() const { return d_; }
  std::size_t m() const { return labels_.size(); }
  std::size_t nnz() const { return values_.size(); }

  Column column(std::size_t i) const;
  double label(std::size_t i) const { return labels_[i]; }
  std::span<const double> labels() const { return labels_; }
  double squared_norm(std::size_t i) const { return norms2_[i]; }

  double dot(std::size_t i, std::span<const double> w) const;
  // w += scale * x_i
  void axpy(std::size_t i, double scale, std::span<double> w) const;

  std::vector<double> dense_column(std::size_t i) const;

 private:
  std::size_t d_ = 0;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<std::uint32_t> row_idx_;
  std::vector<double> values_;
  std::vector<double> labels_;
  std::vector<double> norms2_;
};

struct DenseFormat {
  char delimiter = ',';
  bool has_header = false;
  std::size_t label_column = 0;
};

// One instance per row; every non-label field becomes a feature.
Dataset load_dense(const std::string& path, const DenseFormat& format);
Dataset parse_dense(const std::string& text, const DenseFormat& format);

// Sparse "label idx:val idx:val ..." lines with 1-based indices. An empty
// label map keeps labels as read; otherwise every label must be mapped.
using LabelMap = std::map<double, double>;
Dataset load_libsvm(const std::string& path, const LabelMap& label_map);
Dataset parse_libsvm(const std::string& text, const LabelMap& label_map);

enum class NormalizeMode {
  kPerInstanceUnit,  // every nonzero column scaled to unit norm
  kCapAtOne,         // only columns with norm > 1 are scaled
};

NormalizeMode normalize_mode_from_name(const std::string& name);
Dataset normalize(const Dataset& ds, NormalizeMode mode = NormalizeMode::kPerInstanceUnit);

// Leaf id -> sorted data indices. Blocks are disjoint and cover 0..m-1.
struct Partition {
  std::map<NodeId, std::vector<std::size_t>> blocks;

  const std::vector<std::size_t>& block(NodeId leaf) const;
  std::size_t total_size() const;
};

// Shuffles 0..m-1 with a seeded generator, then cuts contiguous runs of
// floor(fraction * m) indices; the last leaf takes the remainder.
Partition partition_by_fractions(std::size_t m, std::span<const double> fractions,
                                 std::span<const NodeId> leaf_ids,
                                 std::uint64_t seed);
Partition partition_by_fractions(const Dataset& ds, std::span<const double> fractions,
                                 std::span<const NodeId> leaf_ids,
                                 std::uint64_t seed);

// Checks disjointness and coverage of 0..m-1; throws ConfigError otherwise.
void validate_partition(const Partition& partition, std::size_t m);

}  // namespace gdca
