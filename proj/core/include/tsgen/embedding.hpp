#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tsgen {

using EmbeddingVector = std::vector<double>;

enum class EmbedderKind { local_deterministic, remote };

// Transport retry policy for remote services: transport failures and 5xx
// responses are retried with exponential backoff; auth and other client
// errors are not.
struct RetryPolicy {
    int retries = 2;
    std::chrono::milliseconds initial_backoff{1000};
};

struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::local_deterministic;
    std::size_t dimension = 256;
    std::string remote_endpoint;  // remote only
    std::string remote_model_id;  // remote only

    // kind ":" dimension ":" model id; recorded in indices so a stale index
    // cannot be silently queried with a different embedder.
    std::string fingerprint() const;

    static EmbedderSpec local(std::size_t dimension = 256);
    static EmbedderSpec remote(std::string endpoint, std::string model_id,
                               std::size_t dimension);
    static EmbedderSpec from_fingerprint(std::string_view fingerprint,
                                         std::string endpoint = "");
};

// FNV-1a 64-bit; the bucket hash of the local embedder.
std::uint64_t fnv1a64(std::string_view bytes);

// local_deterministic: lowercase, tokenize, hash each token into a bucket,
// accumulate term frequencies, L2-normalize. remote: POST to the endpoint
// and return its vector unchanged.
EmbeddingVector embed_text(std::string_view text, const EmbedderSpec& spec,
                           const RetryPolicy& retry = {});

// dot(a,b) / (|a||b|), clamped to [-1,1] on output.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace tsgen
