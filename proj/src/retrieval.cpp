#include "chartreview/retrieval.hpp"

#include <algorithm>

#include <json.hpp>

#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

using nlohmann::json;

namespace {

constexpr const char* kIndexFormat = "chartreview-index";
constexpr int kIndexVersion = 1;

json config_json(const RetrievalConfig& c) {
  return {{"strategy", strategy_name(c.strategy)}, {"chunk_size", c.chunk_size}, {"overlap", c.overlap},
          {"sizes", c.sizes}, {"hier_overlap", c.hier_overlap}, {"k", c.k}, {"merge_ratio", c.merge_ratio},
          {"max_context_chars", c.max_context_chars}};
}

}  // namespace

std::string strategy_name(Strategy s) { return s == Strategy::Flat ? "flat" : "hierarchical"; }

RetrievalConfig RetrievalConfig::v1() { return RetrievalConfig{}; }

RetrievalConfig RetrievalConfig::v2() {
  RetrievalConfig c;
  c.strategy = Strategy::Hierarchical;
  c.k = 20;
  return c;
}

void RetrievalConfig::validate() const {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (!(merge_ratio > 0.0 && merge_ratio <= 1.0)) fail(ErrorCode::InvalidArgument, "merge_ratio must be in (0, 1]");
  if (strategy == Strategy::Flat) {
    if (chunk_size < 1) fail(ErrorCode::InvalidArgument, "chunk_size must be >= 1");
    if (overlap >= chunk_size) fail(ErrorCode::InvalidArgument, "overlap must be < chunk_size");
  } else {
    if (sizes.empty()) fail(ErrorCode::InvalidArgument, "hierarchical sizes must not be empty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] < 1 || (i && sizes[i] >= sizes[i - 1])) {
        fail(ErrorCode::InvalidArgument, "hierarchical sizes must be >= 1 and strictly decreasing");
      }
    }
    if (hier_overlap >= sizes[0]) fail(ErrorCode::InvalidArgument, "hier_overlap must be < top chunk size");
  }
}

std::string RetrievalConfig::label() const {
  auto j = config_json(*this);
  if (j == config_json(v1())) return "v1";
  if (j == config_json(v2())) return "v2";
  return "custom";
}

std::string monograph_doc_id(const std::string& drug_id, SectionKind kind) {
  return drug_id + ":" + std::string(section_heading(kind));
}

std::string guideline_doc_id(const std::string& guideline_id) { return "guideline:" + guideline_id; }

KnowledgeIndex KnowledgeIndex::build(const Corpus& corpus, const RetrievalConfig& cfg, EmbeddingBackend& embedder) {
  cfg.validate();
  KnowledgeIndex ki;
  ki.cfg_ = cfg;
  ki.corpus_hash_ = corpus.hash;
  ki.embedder_ = embedder.name();
  ki.index_ = VectorIndex(embedder.dim());

  auto chunk_doc = [&](const std::string& text, const std::string& doc, const ChunkMeta& meta) {
    if (text.empty()) return;
    if (cfg.strategy == Strategy::Flat) {
      ki.tree_.merge(chunk_flat_tree(text, cfg.chunk_size, cfg.overlap, doc, meta));
    } else {
      ki.tree_.merge(chunk_hierarchical(text, cfg.sizes, doc, cfg.hier_overlap, meta));
    }
  };
  for (const auto& m : corpus.monographs) {
    for (auto k : kAllSections) chunk_doc(m.section(k), monograph_doc_id(m.drug_id, k), {m.drug_id, k});
  }
  for (const auto& g : corpus.guidelines) chunk_doc(g.body, guideline_doc_id(g.guideline_id), {});

  auto leaves = ki.tree_.leaves();
  std::vector<std::string> texts;
  texts.reserve(leaves.size());
  for (const auto* c : leaves) texts.push_back(c->text);
  auto vecs = embedder.embed_batch(texts);
  for (std::size_t i = 0; i < leaves.size(); ++i) ki.index_.add(leaves[i]->chunk_id, vecs[i], leaves[i]->meta);
  return ki;
}

void KnowledgeIndex::save(const std::filesystem::path& path) const {
  json nodes = json::array();
  for (const auto& c : tree_.nodes()) {
    json n = {{"id", c.chunk_id}, {"doc", c.doc_id}, {"level", c.level}, {"start", c.start},
              {"end", c.end}, {"text", c.text}, {"children", c.children}};
    n["parent"] = c.parent_id ? json(*c.parent_id) : json(nullptr);
    n["drug_id"] = c.meta.drug_id ? json(*c.meta.drug_id) : json(nullptr);
    n["section"] = c.meta.section ? json(std::string(section_name(*c.meta.section))) : json(nullptr);
    nodes.push_back(std::move(n));
  }
  json vectors = json::array();
  for (std::size_t i = 0; i < index_.size(); ++i) {
    auto v = index_.vector(i);
    vectors.push_back({{"id", index_.id(i)}, {"v", std::vector<double>(v.data(), v.data() + v.size())}});
  }
  json doc = {{"format", kIndexFormat}, {"version", kIndexVersion}, {"dim", index_.dim()},
              {"strategy", strategy_name(cfg_.strategy)}, {"corpus_hash", corpus_hash_}, {"embedder", embedder_},
              {"config", config_json(cfg_)}, {"nodes", std::move(nodes)}, {"vectors", std::move(vectors)}};
  write_file(path, doc.dump());
}

KnowledgeIndex KnowledgeIndex::load(const std::filesystem::path& path, const Corpus& corpus,
                                    const EmbeddingBackend& embedder) {
  auto doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || doc.value("format", "") != kIndexFormat) {
    fail(ErrorCode::IndexMismatch, path.string() + " is not an index file");
  }
  if (doc.value("version", 0) != kIndexVersion) fail(ErrorCode::IndexMismatch, "unsupported index version");
  if (doc.value("corpus_hash", "") != corpus.hash) {
    fail(ErrorCode::IndexMismatch, "index was built from corpus " + doc.value("corpus_hash", std::string("?")) +
                                       ", loaded corpus is " + corpus.hash);
  }
  if (doc.value("dim", 0) != embedder.dim()) {
    fail(ErrorCode::DimensionMismatch, "index dim " + std::to_string(doc.value("dim", 0)) +
                                           " does not match embedder dim " + std::to_string(embedder.dim()));
  }
  if (doc.value("embedder", "") != embedder.name()) {
    fail(ErrorCode::IndexMismatch, "index embedder " + doc.value("embedder", std::string("?")) +
                                       " differs from " + embedder.name());
  }

  KnowledgeIndex ki;
  const auto& c = doc["config"];
  ki.cfg_.strategy = c.at("strategy").get<std::string>() == "flat" ? Strategy::Flat : Strategy::Hierarchical;
  ki.cfg_.chunk_size = c.at("chunk_size").get<std::size_t>();
  ki.cfg_.overlap = c.at("overlap").get<std::size_t>();
  ki.cfg_.sizes = c.at("sizes").get<std::vector<std::size_t>>();
  ki.cfg_.hier_overlap = c.at("hier_overlap").get<std::size_t>();
  ki.cfg_.k = c.at("k").get<std::size_t>();
  ki.cfg_.merge_ratio = c.at("merge_ratio").get<double>();
  ki.cfg_.max_context_chars = c.at("max_context_chars").get<std::size_t>();
  ki.corpus_hash_ = doc["corpus_hash"].get<std::string>();
  ki.embedder_ = doc["embedder"].get<std::string>();
  ki.index_ = VectorIndex(embedder.dim());

  for (const auto& n : doc.at("nodes")) {
    Chunk ch;
    ch.chunk_id = n.at("id").get<std::string>();
    ch.doc_id = n.at("doc").get<std::string>();
    ch.level = n.at("level").get<int>();
    ch.start = n.at("start").get<std::size_t>();
    ch.end = n.at("end").get<std::size_t>();
    ch.text = n.at("text").get<std::string>();
    ch.children = n.at("children").get<std::vector<std::string>>();
    if (!n.at("parent").is_null()) ch.parent_id = n["parent"].get<std::string>();
    if (!n.at("drug_id").is_null()) ch.meta.drug_id = n["drug_id"].get<std::string>();
    if (!n.at("section").is_null()) ch.meta.section = parse_section_name(n["section"].get<std::string>());
    ki.tree_.add(std::move(ch));
  }
  for (const auto& e : doc.at("vectors")) {
    auto id = e.at("id").get<std::string>();
    auto vals = e.at("v").get<std::vector<double>>();
    Vector v = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    ki.index_.add(id, v, ki.tree_.at(id).meta);
  }
  return ki;
}

ContextBundle retrieve_for_task(const Corpus& corpus, const KnowledgeIndex& kindex, EmbeddingBackend& embedder,
                                const std::optional<std::string>& drug_id, ReviewTask task,
                                const std::string& question) {
  const auto& cfg = kindex.config();
  auto sections = task_sections(task);
  if (is_drug_task(task)) {
    if (!drug_id) return {};
    if (!corpus.find(*drug_id)) fail(ErrorCode::UnknownDrug, "unknown drug_id '" + *drug_id + "'");
  }
  VectorIndex::Filter filter;
  if (is_drug_task(task)) {
    filter = [&](const ChunkMeta& m) {
      return m.drug_id && *m.drug_id == *drug_id && m.section &&
             std::find(sections.begin(), sections.end(), *m.section) != sections.end();
    };
  } else {
    filter = [](const ChunkMeta& m) { return !m.drug_id; };
  }
  auto qv = embedder.embed(question);
  auto hits = kindex.index().query(qv, cfg.k, filter);
  ContextBundle bundle = cfg.strategy == Strategy::Hierarchical ? auto_merge(hits, kindex.tree(), cfg.merge_ratio)
                                                                : bundle_from_hits(hits, kindex.tree());
  cap_bundle(bundle, cfg.max_context_chars);
  return bundle;
}

}  // namespace chartreview
