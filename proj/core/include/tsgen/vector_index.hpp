#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tsgen/corpus.hpp"
#include "tsgen/embedding.hpp"

namespace tsgen {

struct IndexEntry {
    std::string passage_id;
    std::string text;
    EmbeddingVector vector;
};

// Immutable after build; concurrent queries are safe.
struct VectorIndex {
    std::vector<IndexEntry> entries;
    std::size_t dimension = 0;
    std::string embedder_fingerprint;

    std::size_t size() const { return entries.size(); }
    const IndexEntry* find(std::string_view passage_id) const;
};

struct RetrievalHit {
    std::string passage_id;
    std::string text;
    double similarity = 0.0;
    std::size_t rank = 0;  // 1-based, consecutive
};

// One entry per passage, embedded with the given spec. Rejects duplicate
// passage ids; embedder failures propagate with the passage id attached.
VectorIndex build_index(std::span<const Passage> passages, const EmbedderSpec& spec,
                        const RetryPolicy& retry = {});

// Exact scan over all entries: min(k, size) hits ordered by similarity
// descending, ties broken by passage_id ascending.
std::vector<RetrievalHit> query_top_k(const VectorIndex& index,
                                      const EmbeddingVector& query, std::size_t k);

// Line-delimited UTF-8: one header line (format version, dimension,
// fingerprint), then one line per entry with the id, the vector components
// at 9 decimals and the text with escaped newlines.
void persist_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

// Additionally rejects indices whose fingerprint does not match the expected
// embedder ("stale index"; rebuild with `index build`).
VectorIndex load_index(const std::filesystem::path& path, const EmbedderSpec& expected);

}  // namespace tsgen
