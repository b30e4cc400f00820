#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "tsgen/corpus.hpp"

namespace {

std::string synthetic_manual(std::size_t paragraphs) {
    std::mt19937 rng(5);
    static const char* words[] = {"delivery", "packet",  "scan",   "switch", "USt",
                                  "rate",     "mode",    "Öffne",  "ZAB",    "town",
                                  "verify",   "details", "press",  "flag",   "backend"};
    std::string out;
    for (std::size_t p = 0; p < paragraphs; ++p) {
        for (int s = 0; s < 5; ++s) {
            for (int w = 0; w < 12; ++w) {
                out += words[rng() % std::size(words)];
                out.push_back(' ');
            }
            out.back() = '.';
            out.push_back(' ');
        }
        out += "\n\n";
    }
    return out;
}

void BM_NormalizeText(benchmark::State& state) {
    const std::string raw = synthetic_manual(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsgen::normalize_text(raw, tsgen::OriginFormat::plain));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(raw.size()));
}
BENCHMARK(BM_NormalizeText)->Arg(10)->Arg(100)->Arg(500);

void BM_ChunkDocument(benchmark::State& state) {
    tsgen::SourceDocument doc;
    doc.doc_id = "bench";
    doc.title = "bench";
    doc.body = tsgen::normalize_text(synthetic_manual(static_cast<std::size_t>(state.range(0))),
                                     tsgen::OriginFormat::plain);
    const tsgen::ChunkingPolicy policy{512, 0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsgen::chunk_document(doc, policy));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(doc.body.size()));
}
BENCHMARK(BM_ChunkDocument)->Arg(10)->Arg(100)->Arg(500);

void BM_CountTokens(benchmark::State& state) {
    const std::string text = synthetic_manual(50);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsgen::count_tokens(text));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_CountTokens);

}  // namespace

BENCHMARK_MAIN();
