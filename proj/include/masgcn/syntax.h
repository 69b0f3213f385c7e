#pragma once

// Compiles a dependency tree into distance, mask, type and partition tensors.

#include <span>
#include <vector>

#include "masgcn/common.h"
#include "masgcn/corpus.h"

namespace masgcn::syntax {

// All-pairs hop counts on the undirected tree, one BFS per token.
// Throws StructureError for cyclic or disconnected head arrays.
IntMat distances(std::span<const int> heads);

// masks[k-1](i,j) = 0 if D(i,j) <= k, kMaskSentinel otherwise, k = 1..P.
std::vector<Mat> build_masks(const IntMat& dist, int num_views);

// Symmetric: the edge (head, dependent, type) writes the type id at both
// (head, dependent) and (dependent, head). Root carries no edge.
IntMat build_type_matrix(std::span<const int> heads, std::span<const int> dep_type_ids);
IntMat build_type_matrix(const RawExample& ex, const Vocabulary& dep_vocab);

// Row i is one-hot at column (type id - 1) of token i's incoming label;
// the root row uses the id of its own label ("root"). N x U.
Mat build_partition(std::span<const int> dep_type_ids, int num_types);
Mat build_partition(const RawExample& ex, const Vocabulary& dep_vocab);

struct SyntacticFeatures {
  IntMat dist;
  std::vector<Mat> masks;
  IntMat type0;
  // Partition class (type id) per token; `partition` is its one-hot form.
  std::vector<int> partition_ids;
  Mat partition;
};

SyntacticFeatures compile(std::span<const int> heads, std::span<const int> dep_type_ids,
                          int num_views, int num_types);

int diameter(const IntMat& dist);

}  // namespace masgcn::syntax
