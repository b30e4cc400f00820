#include <benchmark/benchmark.h>

#include <random>

#include "tsgen/embedding.hpp"
#include "tsgen/vector_index.hpp"

namespace {

tsgen::VectorIndex make_index(std::size_t entries, std::size_t dim) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    tsgen::VectorIndex index;
    index.dimension = dim;
    index.embedder_fingerprint = "local_deterministic:" + std::to_string(dim) + ":";
    index.entries.reserve(entries);
    for (std::size_t i = 0; i < entries; ++i) {
        tsgen::EmbeddingVector v(dim);
        for (auto& x : v) x = dist(rng);
        index.entries.push_back({"p#" + std::to_string(i), "t", std::move(v)});
    }
    return index;
}

void BM_QueryTopK(benchmark::State& state) {
    const auto index = make_index(static_cast<std::size_t>(state.range(0)), 256);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    tsgen::EmbeddingVector query(256);
    for (auto& x : query) x = dist(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsgen::query_top_k(index, query, 3));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QueryTopK)->Arg(1000)->Arg(10000)->Arg(50000);

void BM_EmbedText(benchmark::State& state) {
    std::string text;
    for (int i = 0; i < 512; ++i) text += " word" + std::to_string(i % 97);
    const auto spec = tsgen::EmbedderSpec::local();
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsgen::embed_text(text, spec));
    }
}
BENCHMARK(BM_EmbedText);

void BM_CosineSimilarity(benchmark::State& state) {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    tsgen::EmbeddingVector a(256), b(256);
    for (auto& x : a) x = dist(rng);
    for (auto& x : b) x = dist(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsgen::cosine_similarity(a, b));
    }
}
BENCHMARK(BM_CosineSimilarity);

}  // namespace

BENCHMARK_MAIN();
