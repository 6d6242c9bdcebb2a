#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chartreview/chunking.hpp"
#include "chartreview/embedding.hpp"

namespace chartreview {

struct Hit {
  std::string chunk_id;
  double score = 0.0;
};

// Exact cosine index. Vectors are stored unit-normalised, one per column.
class VectorIndex {
 public:
  explicit VectorIndex(int dim = 256);

  int dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }

  // DimensionMismatch on wrong length, DuplicateId on a repeated id.
  void add(const std::string& chunk_id, const Vector& v, ChunkMeta meta = {});

  const std::string& id(std::size_t i) const { return ids_[i]; }
  const ChunkMeta& meta(std::size_t i) const { return meta_[i]; }
  Eigen::Ref<const Vector> vector(std::size_t i) const;

  using Filter = std::function<bool(const ChunkMeta&)>;

  // Top-k by cosine, ties broken by ascending chunk_id.
  std::vector<Hit> query(const Vector& qv, std::size_t k, const Filter& filter = nullptr) const;

 private:
  int dim_;
  std::vector<std::string> ids_;
  std::vector<ChunkMeta> meta_;
  std::map<std::string, std::size_t> pos_;
  Eigen::MatrixXd vectors_;  // dim x capacity, first size() columns live
};

struct ContextItem {
  std::string chunk_id;
  std::string text;
  double score = 0.0;
};

struct ContextBundle {
  std::vector<ContextItem> items;
  std::size_t total_chars = 0;

  std::vector<std::string> chunk_ids() const;
};

// Replaces children by their parent while the present fraction of a
// parent's children reaches merge_ratio, until nothing changes.
std::set<std::string> auto_merge_ids(const std::set<std::string>& leaves, const ChunkTree& tree, double merge_ratio);

// Same, scoring each merged node by its best retrieved leaf.
ContextBundle auto_merge(const std::vector<Hit>& leaves, const ChunkTree& tree, double merge_ratio);

ContextBundle bundle_from_hits(const std::vector<Hit>& hits, const ChunkTree& tree);

// Drops the lowest-scoring items until total_chars <= max_chars.
void cap_bundle(ContextBundle& bundle, std::size_t max_chars);

}  // namespace chartreview
