#include "tsgen/vector_index.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tsgen/errors.hpp"

namespace tsgen {

namespace {

constexpr std::string_view kFormatTag = "tsgen.index.v1";

std::string escape_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 >= s.size()) {
            out.push_back(s[i]);
            continue;
        }
        ++i;
        switch (s[i]) {
            case '\\': out.push_back('\\'); break;
            case 't': out.push_back('\t'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            default: out.push_back(s[i]);
        }
    }
    return out;
}

std::string format_component(double v) {
    if (v == 0.0) v = 0.0;  // avoid "-0.000000000"
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

}  // namespace

const IndexEntry* VectorIndex::find(std::string_view passage_id) const {
    for (const auto& e : entries) {
        if (e.passage_id == passage_id) return &e;
    }
    return nullptr;
}

VectorIndex build_index(std::span<const Passage> passages, const EmbedderSpec& spec,
                        const RetryPolicy& retry) {
    if (passages.empty()) throw ValidationError("cannot build an index from zero passages");
    VectorIndex index;
    index.dimension = spec.dimension;
    index.embedder_fingerprint = spec.fingerprint();
    index.entries.reserve(passages.size());
    std::set<std::string_view> seen;
    for (const auto& p : passages) {
        if (!seen.insert(p.passage_id).second) {
            throw ValidationError("duplicate passage_id \"" + p.passage_id + "\"");
        }
        EmbeddingVector v;
        try {
            v = embed_text(p.text, spec, retry);
        } catch (const Error& e) {
            throw BackendError("embedding passage \"" + p.passage_id +
                               "\" failed: " + e.what());
        }
        if (v.size() != index.dimension) {
            throw BackendError("embedder returned dimension " + std::to_string(v.size()) +
                               " for passage \"" + p.passage_id + "\", expected " +
                               std::to_string(index.dimension));
        }
        index.entries.push_back({p.passage_id, p.text, std::move(v)});
    }
    return index;
}

std::vector<RetrievalHit> query_top_k(const VectorIndex& index,
                                      const EmbeddingVector& query, std::size_t k) {
    if (k == 0) throw ValidationError("k must be at least 1");
    if (index.entries.empty()) throw ValidationError("cannot query an empty index");
    if (query.size() != index.dimension) {
        throw ValidationError("query dimension " + std::to_string(query.size()) +
                              " does not match index dimension " +
                              std::to_string(index.dimension));
    }

    struct Scored {
        double similarity;
        const IndexEntry* entry;
    };
    std::vector<Scored> scored;
    scored.reserve(index.entries.size());
    for (const auto& e : index.entries) {
        scored.push_back({cosine_similarity(e.vector, query), &e});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.entry->passage_id < b.entry->passage_id;
    });

    const std::size_t n = std::min(k, scored.size());
    std::vector<RetrievalHit> hits;
    hits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        hits.push_back({scored[i].entry->passage_id, scored[i].entry->text,
                        scored[i].similarity, i + 1});
    }
    return hits;
}

void persist_index(const VectorIndex& index, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write index file: " + path.string());
    out << kFormatTag << '\t' << index.dimension << '\t' << index.embedder_fingerprint
        << '\n';
    for (const auto& e : index.entries) {
        out << escape_field(e.passage_id) << '\t';
        for (std::size_t i = 0; i < e.vector.size(); ++i) {
            if (i > 0) out << ' ';
            out << format_component(e.vector[i]);
        }
        out << '\t' << escape_field(e.text) << '\n';
    }
    if (!out) throw ValidationError("failed writing index file: " + path.string());
}

VectorIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read index file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("index file is empty: " + path.string());
    std::istringstream header(line);
    std::string tag, dim_str, fingerprint;
    std::getline(header, tag, '\t');
    std::getline(header, dim_str, '\t');
    std::getline(header, fingerprint, '\t');
    if (tag != kFormatTag) {
        throw ValidationError("stale or foreign index file (expected " +
                              std::string(kFormatTag) + "); rebuild with `index build`");
    }
    VectorIndex index;
    try {
        index.dimension = std::stoul(dim_str);
    } catch (const std::exception&) {
        throw ValidationError("index header carries a malformed dimension");
    }
    index.embedder_fingerprint = fingerprint;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            throw ValidationError("malformed index entry at line " + std::to_string(line_no));
        }
        IndexEntry entry;
        entry.passage_id = unescape_field(std::string_view(line).substr(0, t1));
        entry.text = unescape_field(std::string_view(line).substr(t2 + 1));
        entry.vector.reserve(index.dimension);
        const char* p = line.data() + t1 + 1;
        const char* end = line.data() + t2;
        while (p < end) {
            char* next = nullptr;
            const double v = std::strtod(p, &next);
            if (next == p) break;
            entry.vector.push_back(v);
            p = next;
            while (p < end && *p == ' ') ++p;
        }
        if (entry.vector.size() != index.dimension) {
            throw ValidationError("index entry at line " + std::to_string(line_no) +
                                  " has dimension " + std::to_string(entry.vector.size()) +
                                  ", expected " + std::to_string(index.dimension));
        }
        index.entries.push_back(std::move(entry));
    }
    return index;
}

VectorIndex load_index(const std::filesystem::path& path, const EmbedderSpec& expected) {
    VectorIndex index = load_index(path);
    if (index.embedder_fingerprint != expected.fingerprint() ||
        index.dimension != expected.dimension) {
        throw ValidationError("stale index: built with \"" + index.embedder_fingerprint +
                              "\" but the pipeline expects \"" + expected.fingerprint() +
                              "\"; rebuild with `index build`");
    }
    return index;
}

}  // namespace tsgen
