#include "chartreview/chunking.hpp"

#include <cstdio>

#include "chartreview/error.hpp"

namespace chartreview {

namespace {

bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

std::string index_suffix(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return buf;
}

struct Span {
  std::size_t start, end;
};

std::vector<Span> flat_spans(std::string_view text, std::size_t chunk_size, std::size_t overlap) {
  if (chunk_size < 1) fail(ErrorCode::InvalidArgument, "chunk_size must be >= 1");
  if (overlap >= chunk_size) fail(ErrorCode::InvalidArgument, "overlap must be < chunk_size");
  std::vector<Span> spans;
  const std::size_t n = text.size();
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t end = std::min(n, pos + chunk_size);
    while (end < n && end > pos + 1 && is_continuation(text[end])) --end;
    spans.push_back({pos, end});
    if (end == n) break;
    std::size_t next = end > overlap ? end - overlap : 0;
    if (next <= pos) next = end;
    while (next < end && is_continuation(text[next])) ++next;
    pos = next;
  }
  return spans;
}

void split_children(ChunkTree& tree, Chunk& parent, std::string_view text, const std::vector<std::size_t>& sizes,
                    std::size_t level, const ChunkMeta& meta, std::vector<Chunk>& out) {
  if (level + 1 >= sizes.size()) return;
  auto spans = flat_spans(std::string_view(parent.text), sizes[level + 1], 0);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Chunk c;
    c.chunk_id = parent.chunk_id + "." + index_suffix(i);
    c.doc_id = parent.doc_id;
    c.level = static_cast<int>(level + 1);
    c.parent_id = parent.chunk_id;
    c.start = parent.start + spans[i].start;
    c.end = parent.start + spans[i].end;
    c.text = std::string(text.substr(c.start, c.end - c.start));
    c.meta = meta;
    parent.children.push_back(c.chunk_id);
    out.push_back(std::move(c));
  }
  std::size_t first = out.size() - spans.size();
  for (std::size_t i = first; i < first + spans.size(); ++i) {
    std::vector<Chunk> grand;
    split_children(tree, out[i], text, sizes, level + 1, meta, grand);
    for (auto& g : grand) out.push_back(std::move(g));
  }
}

}  // namespace

std::vector<Chunk> chunk_flat(std::string_view text, std::size_t chunk_size, std::size_t overlap,
                              const std::string& doc_id) {
  std::vector<Chunk> out;
  auto spans = flat_spans(text, chunk_size, overlap);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Chunk c;
    c.chunk_id = doc_id + "#" + index_suffix(i);
    c.doc_id = doc_id;
    c.start = spans[i].start;
    c.end = spans[i].end;
    c.text = std::string(text.substr(c.start, c.end - c.start));
    out.push_back(std::move(c));
  }
  return out;
}

void ChunkTree::add(Chunk chunk) {
  if (pos_.count(chunk.chunk_id)) fail(ErrorCode::DuplicateId, "chunk id '" + chunk.chunk_id + "' repeated");
  pos_.emplace(chunk.chunk_id, nodes_.size());
  nodes_.push_back(std::move(chunk));
}

void ChunkTree::merge(ChunkTree other) {
  for (auto& c : other.nodes_) add(std::move(c));
}

const Chunk* ChunkTree::find(std::string_view id) const {
  auto it = pos_.find(std::string(id));
  return it == pos_.end() ? nullptr : &nodes_[it->second];
}

const Chunk& ChunkTree::at(std::string_view id) const {
  const auto* c = find(id);
  if (!c) fail(ErrorCode::UnknownChunk, "unknown chunk '" + std::string(id) + "'");
  return *c;
}

std::vector<const Chunk*> ChunkTree::leaves() const {
  std::vector<const Chunk*> out;
  for (const auto& c : nodes_) {
    if (c.children.empty()) out.push_back(&c);
  }
  return out;
}

std::vector<const Chunk*> ChunkTree::roots() const {
  std::vector<const Chunk*> out;
  for (const auto& c : nodes_) {
    if (!c.parent_id) out.push_back(&c);
  }
  return out;
}

ChunkTree chunk_hierarchical(std::string_view text, const std::vector<std::size_t>& sizes, const std::string& doc_id,
                             std::size_t top_overlap, const ChunkMeta& meta) {
  if (sizes.empty()) fail(ErrorCode::InvalidArgument, "hierarchical sizes must not be empty");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) fail(ErrorCode::InvalidArgument, "hierarchical sizes must be >= 1");
    if (i && sizes[i] >= sizes[i - 1]) fail(ErrorCode::InvalidArgument, "hierarchical sizes must strictly decrease");
  }
  ChunkTree tree;
  auto tops = chunk_flat(text, sizes[0], top_overlap, doc_id);
  for (auto& top : tops) {
    top.meta = meta;
    std::vector<Chunk> below;
    split_children(tree, top, text, sizes, 0, meta, below);
    tree.add(std::move(top));
    for (auto& c : below) tree.add(std::move(c));
  }
  return tree;
}

ChunkTree chunk_flat_tree(std::string_view text, std::size_t chunk_size, std::size_t overlap,
                          const std::string& doc_id, const ChunkMeta& meta) {
  ChunkTree tree;
  for (auto& c : chunk_flat(text, chunk_size, overlap, doc_id)) {
    c.meta = meta;
    tree.add(std::move(c));
  }
  return tree;
}

}  // namespace chartreview
