#include "tsgen/embedding.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "http_client.hpp"
#include "tsgen/errors.hpp"
#include "tsgen/unicode.hpp"

namespace tsgen {

namespace {

using nlohmann::json;

EmbeddingVector embed_local(std::string_view text, const EmbedderSpec& spec) {
    const auto tokens = tokenize(lowercase(text));
    if (tokens.empty()) {
        throw ValidationError("cannot embed empty text");
    }
    EmbeddingVector v(spec.dimension, 0.0);
    for (const auto& token : tokens) {
        v[fnv1a64(token) % spec.dimension] += 1.0;
    }
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    const double norm = std::sqrt(norm_sq);
    for (double& x : v) x /= norm;
    return v;
}

EmbeddingVector embed_remote(std::string_view text, const EmbedderSpec& spec,
                             const RetryPolicy& retry) {
    const json body = {{"input", std::string(text)}, {"model", spec.remote_model_id}};
    const std::string response =
        detail::post_json(spec.remote_endpoint, body.dump(),
                          detail::bearer_token("TSGEN_EMBED_API_KEY"), retry, "embedder");

    json parsed;
    try {
        parsed = json::parse(response);
    } catch (const json::exception&) {
        throw BackendError("embedder returned invalid JSON from " + spec.remote_endpoint);
    }
    const json* arr = nullptr;
    if (parsed.is_array()) {
        arr = &parsed;
    } else if (parsed.contains("embedding") && parsed["embedding"].is_array()) {
        arr = &parsed["embedding"];
    } else if (parsed.contains("data") && parsed["data"].is_array() &&
               !parsed["data"].empty() && parsed["data"][0].contains("embedding")) {
        arr = &parsed["data"][0]["embedding"];
    }
    if (arr == nullptr) {
        throw BackendError("embedder response carries no embedding array (" +
                           spec.remote_endpoint + ")");
    }
    EmbeddingVector v;
    v.reserve(arr->size());
    for (const auto& x : *arr) {
        if (!x.is_number()) {
            throw BackendError("embedder response contains a non-numeric component");
        }
        v.push_back(x.get<double>());
    }
    if (v.empty()) throw BackendError("embedder returned an empty vector");
    return v;
}

}  // namespace

std::string EmbedderSpec::fingerprint() const {
    const char* name = kind == EmbedderKind::local_deterministic ? "local_deterministic"
                                                                 : "remote";
    return std::string(name) + ":" + std::to_string(dimension) + ":" + remote_model_id;
}

EmbedderSpec EmbedderSpec::local(std::size_t dimension) {
    EmbedderSpec spec;
    spec.kind = EmbedderKind::local_deterministic;
    spec.dimension = dimension;
    return spec;
}

EmbedderSpec EmbedderSpec::remote(std::string endpoint, std::string model_id,
                                  std::size_t dimension) {
    EmbedderSpec spec;
    spec.kind = EmbedderKind::remote;
    spec.dimension = dimension;
    spec.remote_endpoint = std::move(endpoint);
    spec.remote_model_id = std::move(model_id);
    return spec;
}

EmbedderSpec EmbedderSpec::from_fingerprint(std::string_view fingerprint,
                                            std::string endpoint) {
    const auto first = fingerprint.find(':');
    const auto second = first == std::string_view::npos
                            ? std::string_view::npos
                            : fingerprint.find(':', first + 1);
    if (second == std::string_view::npos) {
        throw ValidationError("malformed embedder fingerprint: " + std::string(fingerprint));
    }
    const std::string kind(fingerprint.substr(0, first));
    std::size_t dimension = 0;
    try {
        dimension = std::stoul(std::string(fingerprint.substr(first + 1, second - first - 1)));
    } catch (const std::exception&) {
        throw ValidationError("malformed embedder fingerprint: " + std::string(fingerprint));
    }
    if (dimension == 0) {
        throw ValidationError("embedder fingerprint has zero dimension");
    }
    if (kind == "local_deterministic") {
        return local(dimension);
    }
    if (kind == "remote") {
        return remote(std::move(endpoint), std::string(fingerprint.substr(second + 1)),
                      dimension);
    }
    throw ValidationError("unknown embedder kind in fingerprint: " + kind);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= static_cast<std::uint64_t>(c);
        hash *= 1099511628211ULL;
    }
    return hash;
}

EmbeddingVector embed_text(std::string_view text, const EmbedderSpec& spec,
                           const RetryPolicy& retry) {
    if (spec.dimension == 0) throw ValidationError("embedder dimension must be positive");
    if (spec.kind == EmbedderKind::local_deterministic) {
        return embed_local(text, spec);
    }
    if (text.empty()) throw ValidationError("cannot embed empty text");
    return embed_remote(text, spec, retry);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine similarity dimension mismatch: " +
                              std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    if (a.empty()) throw ValidationError("cosine similarity of empty vectors is undefined");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw ValidationError("cosine similarity undefined for a zero vector");
    }
    const double raw = dot / (std::sqrt(na) * std::sqrt(nb));
    if (raw < -1.0 - 1e-9 || raw > 1.0 + 1e-9) {
        throw std::logic_error("cosine similarity escaped [-1,1] beyond rounding tolerance");
    }
    return std::clamp(raw, -1.0, 1.0);
}

}  // namespace tsgen
