#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chartreview/corpus.hpp"

namespace chartreview {

struct ChunkMeta {
  std::optional<std::string> drug_id;
  std::optional<SectionKind> section;
};

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  int level = 0;  // depth from the top-level split; leaves are deepest
  std::optional<std::string> parent_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  ChunkMeta meta;
  std::vector<std::string> children;
};

// Greedy left-to-right split. Boundaries never fall inside a UTF-8 sequence.
std::vector<Chunk> chunk_flat(std::string_view text, std::size_t chunk_size, std::size_t overlap,
                              const std::string& doc_id = "doc");

class ChunkTree {
 public:
  void add(Chunk chunk);
  void merge(ChunkTree other);

  bool contains(std::string_view id) const { return pos_.find(std::string(id)) != pos_.end(); }
  const Chunk& at(std::string_view id) const;  // UnknownChunk when absent
  const Chunk* find(std::string_view id) const;

  const std::vector<Chunk>& nodes() const { return nodes_; }
  std::vector<const Chunk*> leaves() const;
  std::vector<const Chunk*> roots() const;
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Chunk> nodes_;
  std::map<std::string, std::size_t> pos_;
};

// One tree level per entry in sizes; every level is materialised, so short
// text gives a single-child chain. Only the top level uses overlap.
ChunkTree chunk_hierarchical(std::string_view text, const std::vector<std::size_t>& sizes,
                             const std::string& doc_id = "doc", std::size_t top_overlap = 0,
                             const ChunkMeta& meta = {});

// Flat chunks wrapped as a one-level tree.
ChunkTree chunk_flat_tree(std::string_view text, std::size_t chunk_size, std::size_t overlap,
                          const std::string& doc_id, const ChunkMeta& meta = {});

}  // namespace chartreview
