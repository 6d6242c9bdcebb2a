#include "chartreview/vector_index.hpp"

#include <algorithm>

#include "chartreview/error.hpp"

namespace chartreview {

namespace {

bool hit_before(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.chunk_id < b.chunk_id;
}

}  // namespace

VectorIndex::VectorIndex(int dim) : dim_(dim), vectors_(dim, 0) {
  if (dim < 1) fail(ErrorCode::InvalidArgument, "index dim must be >= 1");
}

void VectorIndex::add(const std::string& chunk_id, const Vector& v, ChunkMeta meta) {
  if (v.size() != dim_) {
    fail(ErrorCode::DimensionMismatch,
         "vector for '" + chunk_id + "' has dim " + std::to_string(v.size()) + ", index dim " + std::to_string(dim_));
  }
  if (pos_.count(chunk_id)) fail(ErrorCode::DuplicateId, "chunk '" + chunk_id + "' already indexed");
  auto n = static_cast<Eigen::Index>(ids_.size());
  if (n == vectors_.cols()) vectors_.conservativeResize(Eigen::NoChange, std::max<Eigen::Index>(16, 2 * n));
  Vector u = v;
  normalize_or_e0(u);
  vectors_.col(n) = u;
  pos_.emplace(chunk_id, ids_.size());
  ids_.push_back(chunk_id);
  meta_.push_back(std::move(meta));
}

Eigen::Ref<const Vector> VectorIndex::vector(std::size_t i) const {
  return vectors_.col(static_cast<Eigen::Index>(i));
}

std::vector<Hit> VectorIndex::query(const Vector& qv, std::size_t k, const Filter& filter) const {
  if (qv.size() != dim_) {
    fail(ErrorCode::DimensionMismatch,
         "query dim " + std::to_string(qv.size()) + " does not match index dim " + std::to_string(dim_));
  }
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  double qn = qv.norm();
  std::vector<Hit> hits;
  hits.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (filter && !filter(meta_[i])) continue;
    // Column-wise dot keeps identical vectors bit-identical in score.
    double s = vectors_.col(static_cast<Eigen::Index>(i)).dot(qv);
    hits.push_back({ids_[i], qn > 0.0 ? s / qn : 0.0});
  }
  auto take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(), hit_before);
  hits.resize(take);
  return hits;
}

std::vector<std::string> ContextBundle::chunk_ids() const {
  std::vector<std::string> out;
  for (const auto& it : items) out.push_back(it.chunk_id);
  return out;
}

std::set<std::string> auto_merge_ids(const std::set<std::string>& leaves, const ChunkTree& tree, double merge_ratio) {
  if (!(merge_ratio > 0.0 && merge_ratio <= 1.0)) fail(ErrorCode::InvalidArgument, "merge_ratio must be in (0, 1]");
  for (const auto& id : leaves) {
    const auto& c = tree.at(id);
    if (!c.children.empty()) fail(ErrorCode::UnknownChunk, "'" + id + "' is not a leaf");
  }
  std::set<std::string> present = leaves;
  while (true) {
    std::set<std::string> parents;
    for (const auto& id : present) {
      const auto& c = tree.at(id);
      if (c.parent_id && !present.count(*c.parent_id)) parents.insert(*c.parent_id);
    }
    std::set<std::string> promoted;
    for (const auto& pid : parents) {
      const auto& p = tree.at(pid);
      std::size_t have = 0;
      for (const auto& ch : p.children) have += present.count(ch);
      if (static_cast<double>(have) >= merge_ratio * static_cast<double>(p.children.size()) - 1e-12) {
        promoted.insert(pid);
      }
    }
    if (promoted.empty()) break;
    present.insert(promoted.begin(), promoted.end());
    std::set<std::string> kept;
    for (const auto& id : present) {
      bool covered = false;
      for (auto cur = tree.at(id).parent_id; cur; cur = tree.at(*cur).parent_id) {
        if (present.count(*cur)) {
          covered = true;
          break;
        }
      }
      if (!covered) kept.insert(id);
    }
    present.swap(kept);
  }
  return present;
}

ContextBundle auto_merge(const std::vector<Hit>& leaves, const ChunkTree& tree, double merge_ratio) {
  std::set<std::string> ids;
  for (const auto& h : leaves) ids.insert(h.chunk_id);
  auto merged = auto_merge_ids(ids, tree, merge_ratio);

  std::map<std::string, double> best;
  for (const auto& h : leaves) {
    std::string node = h.chunk_id;
    for (std::optional<std::string> cur = h.chunk_id; cur; cur = tree.at(*cur).parent_id) {
      if (merged.count(*cur)) {
        node = *cur;
        break;
      }
    }
    auto it = best.find(node);
    if (it == best.end() || h.score > it->second) best[node] = h.score;
  }
  std::vector<Hit> hits;
  for (const auto& [id, score] : best) hits.push_back({id, score});
  return bundle_from_hits(hits, tree);
}

ContextBundle bundle_from_hits(const std::vector<Hit>& hits, const ChunkTree& tree) {
  auto sorted = hits;
  std::sort(sorted.begin(), sorted.end(), hit_before);
  ContextBundle b;
  for (const auto& h : sorted) {
    const auto& c = tree.at(h.chunk_id);
    b.items.push_back({h.chunk_id, c.text, h.score});
    b.total_chars += c.text.size();
  }
  return b;
}

void cap_bundle(ContextBundle& bundle, std::size_t max_chars) {
  while (!bundle.items.empty() && bundle.total_chars > max_chars) {
    // lowest score goes first; among ties the later item
    auto worst = bundle.items.begin();
    for (auto it = bundle.items.begin(); it != bundle.items.end(); ++it) {
      if (it->score <= worst->score) worst = it;
    }
    bundle.total_chars -= worst->text.size();
    bundle.items.erase(worst);
  }
}

}  // namespace chartreview
