#include "masgcn/syntax.h"

#include <queue>

namespace masgcn::syntax {

IntMat distances(std::span<const int> heads) {
  const int n = static_cast<int>(heads.size());
  if (n == 0) throw StructureError("distances: empty parse");
  std::vector<std::vector<int>> adj(n);
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const int h = heads[i];
    if (h == -1) {
      ++roots;
      continue;
    }
    if (h < 0 || h >= n || h == i) throw StructureError("distances: head index out of range");
    adj[i].push_back(h);
    adj[h].push_back(i);
  }
  if (roots != 1) throw StructureError("distances: parse must have exactly one root");

  IntMat dist = IntMat::Constant(n, n, -1);
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    q.push(s);
    dist(s, s) = 0;
    int reached = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (dist(s, v) < 0) {
          dist(s, v) = dist(s, u) + 1;
          ++reached;
          q.push(v);
        }
      }
    }
    if (reached != n) throw StructureError("distances: parse is not connected (cycle or forest)");
  }
  return dist;
}

std::vector<Mat> build_masks(const IntMat& dist, int num_views) {
  if (num_views < 1) throw Error("build_masks: view count must be >= 1");
  std::vector<Mat> masks;
  masks.reserve(num_views);
  for (int k = 1; k <= num_views; ++k) {
    masks.push_back((dist.array() <= k).select(Mat::Zero(dist.rows(), dist.cols()), kMaskSentinel));
  }
  return masks;
}

IntMat build_type_matrix(std::span<const int> heads, std::span<const int> dep_type_ids) {
  const int n = static_cast<int>(heads.size());
  if (static_cast<int>(dep_type_ids.size()) != n) throw Error("build_type_matrix: length mismatch");
  IntMat a = IntMat::Zero(n, n);
  for (int d = 0; d < n; ++d) {
    const int h = heads[d];
    if (h < 0) continue;
    a(h, d) = dep_type_ids[d];
    a(d, h) = dep_type_ids[d];
  }
  return a;
}

namespace {

std::vector<int> type_ids(const RawExample& ex, const Vocabulary& dep_vocab) {
  std::vector<int> ids;
  ids.reserve(ex.dep_labels.size());
  for (const auto& l : ex.dep_labels) ids.push_back(dep_vocab.id(l));
  return ids;
}

}  // namespace

IntMat build_type_matrix(const RawExample& ex, const Vocabulary& dep_vocab) {
  return build_type_matrix(ex.heads, type_ids(ex, dep_vocab));
}

Mat build_partition(std::span<const int> dep_type_ids, int num_types) {
  const int n = static_cast<int>(dep_type_ids.size());
  Mat y = Mat::Zero(n, num_types);
  for (int i = 0; i < n; ++i) {
    const int id = dep_type_ids[i];
    if (id < 1 || id > num_types) throw Error("build_partition: type id out of range");
    y(i, id - 1) = 1.0;
  }
  return y;
}

Mat build_partition(const RawExample& ex, const Vocabulary& dep_vocab) {
  return build_partition(type_ids(ex, dep_vocab), dep_vocab.num_types());
}

SyntacticFeatures compile(std::span<const int> heads, std::span<const int> dep_type_ids,
                          int num_views, int num_types) {
  SyntacticFeatures f;
  f.dist = distances(heads);
  f.masks = build_masks(f.dist, num_views);
  f.type0 = build_type_matrix(heads, dep_type_ids);
  f.partition_ids.assign(dep_type_ids.begin(), dep_type_ids.end());
  f.partition = build_partition(dep_type_ids, num_types);
  return f;
}

int diameter(const IntMat& dist) { return dist.size() == 0 ? 0 : dist.maxCoeff(); }

}  // namespace masgcn::syntax
