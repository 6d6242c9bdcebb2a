#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chartreview/chunking.hpp"
#include "chartreview/corpus.hpp"
#include "chartreview/embedding.hpp"
#include "chartreview/review_task.hpp"
#include "chartreview/vector_index.hpp"

namespace chartreview {

enum class Strategy { Flat, Hierarchical };

struct RetrievalConfig {
  Strategy strategy = Strategy::Flat;
  std::size_t chunk_size = 1000;
  std::size_t overlap = 200;
  std::vector<std::size_t> sizes{2048, 512, 123};
  std::size_t hier_overlap = 0;
  std::size_t k = 5;
  double merge_ratio = 0.5;
  std::size_t max_context_chars = 12000;

  static RetrievalConfig v1();
  static RetrievalConfig v2();

  void validate() const;  // InvalidArgument
  std::string label() const;  // "v1" / "v2" for the presets, else "custom"
};

std::string strategy_name(Strategy s);

// Chunk forest plus vector index over its leaves.
class KnowledgeIndex {
 public:
  static KnowledgeIndex build(const Corpus& corpus, const RetrievalConfig& cfg, EmbeddingBackend& embedder);

  // IndexMismatch when the file was built from another corpus or config,
  // DimensionMismatch when the embedder dim differs.
  static KnowledgeIndex load(const std::filesystem::path& path, const Corpus& corpus, const EmbeddingBackend& embedder);
  void save(const std::filesystem::path& path) const;

  const RetrievalConfig& config() const { return cfg_; }
  const ChunkTree& tree() const { return tree_; }
  const VectorIndex& index() const { return index_; }
  const std::string& corpus_hash() const { return corpus_hash_; }
  const std::string& embedder_name() const { return embedder_; }

 private:
  RetrievalConfig cfg_;
  ChunkTree tree_;
  VectorIndex index_;
  std::string corpus_hash_;
  std::string embedder_;
};

std::string monograph_doc_id(const std::string& drug_id, SectionKind kind);
std::string guideline_doc_id(const std::string& guideline_id);

// Drug tasks see only that drug's chunks from the task's sections.
// Case-level tasks (no drug) see guideline chunks only.
ContextBundle retrieve_for_task(const Corpus& corpus, const KnowledgeIndex& kindex, EmbeddingBackend& embedder,
                                const std::optional<std::string>& drug_id, ReviewTask task, const std::string& question);

}  // namespace chartreview
