#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsgen/unicode.hpp"

namespace tsgen {

enum class OriginFormat { plain, markdown, html };

// A normalized domain document. The body is plain text: NFC, no control
// characters besides newline, whitespace runs collapsed to single spaces,
// paragraph breaks kept as single newlines. Case is preserved.
struct SourceDocument {
    std::string doc_id;
    std::string title;
    std::string body;
    OriginFormat origin_format = OriginFormat::plain;
};

struct ChunkingPolicy {
    std::size_t max_tokens = 512;
    std::size_t overlap_tokens = 0;
};

// A token-bounded slice of a document; the unit of indexing and retrieval.
struct Passage {
    std::string passage_id;  // doc_id + '#' + ordinal
    std::string text;
    std::size_t token_count = 0;
    std::string source_doc;
};

struct Requirement {
    std::string req_id;
    std::string section;
    std::string statement;  // may mix German and English
};

struct RequirementsSet {
    std::vector<Requirement> items;
    bool empty() const { return items.empty(); }
    std::size_t size() const { return items.size(); }
};

// Terms survive the pipeline byte-exactly (umlauts and casing retained).
struct GlossaryEntry {
    std::string term;
    std::string definition;
};

struct ScenarioRequest {
    std::string description;
    std::optional<std::string> example_scenario;
    std::optional<std::string> example_description;
};

// Markup stripping (markdown/html), entity decoding, control-character
// removal, whitespace collapse with paragraph breaks kept as single newlines,
// NFC. Letter case is preserved. Throws Utf8Error on malformed input.
std::string normalize_text(std::string_view raw, OriginFormat origin);

// Deterministic approximate token count; see token_spans for the rule.
std::size_t count_tokens(std::string_view text);

// Greedy packing of whole sentences into passages of at most max_tokens.
// Sentences longer than the budget are split at token boundaries. An empty
// body yields zero passages.
std::vector<Passage> chunk_document(const SourceDocument& doc, const ChunkingPolicy& policy);

// CSV with header req_id,section,statement. Rejects duplicate ids.
RequirementsSet load_requirements(const std::filesystem::path& path);

// CSV with header term,definition. Rejects duplicate terms.
std::vector<GlossaryEntry> load_glossary(const std::filesystem::path& path);

// Key-value text file with keys description, example_description and
// example_scenario; indented lines continue the previous value.
ScenarioRequest load_request(const std::filesystem::path& path);

// Loads every .txt/.md/.html file under dir (doc_id = relative path) and
// normalizes it. Documents that are empty after normalization are skipped.
std::vector<SourceDocument> load_corpus_dir(const std::filesystem::path& dir);

}  // namespace tsgen
