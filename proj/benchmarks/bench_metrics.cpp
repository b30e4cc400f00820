#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "tsgen/metrics.hpp"

namespace {

std::string synthetic_scenario(std::mt19937& rng, std::size_t steps) {
    static const std::vector<std::string> verbs = {"Open", "Scan", "Switch", "Verify",
                                                   "Move", "Press", "Set", "Check"};
    static const std::vector<std::string> nouns = {"the app",      "the packet",
                                                   "the USt rate", "the Switch-button",
                                                   "VB mode",      "ZL mode",
                                                   "the ZAB list", "the details"};
    std::string out = "Delivery scenario";
    for (std::size_t i = 0; i < steps; ++i) {
        out += "\n" + std::to_string(i + 1) + ". " + verbs[rng() % verbs.size()] + " " +
               nouns[rng() % nouns.size()] + ".";
    }
    return out;
}

void BM_ScorePair(benchmark::State& state) {
    std::mt19937 rng(1);
    const std::string cand = synthetic_scenario(rng, static_cast<std::size_t>(state.range(0)));
    const std::string ref = synthetic_scenario(rng, static_cast<std::size_t>(state.range(0)));
    tsgen::MetricParams params;
    params.rouge_variants = {tsgen::RougeVariant::rouge_1, tsgen::RougeVariant::rouge_2,
                             tsgen::RougeVariant::rouge_l};
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsgen::score_pair(cand, ref, params));
    }
}
BENCHMARK(BM_ScorePair)->Arg(8)->Arg(24)->Arg(48);

void BM_Bleu(benchmark::State& state) {
    std::mt19937 rng(2);
    const std::string cand = synthetic_scenario(rng, 24);
    const std::string ref = synthetic_scenario(rng, 24);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsgen::bleu(cand, ref));
    }
}
BENCHMARK(BM_Bleu);

void BM_Meteor(benchmark::State& state) {
    std::mt19937 rng(3);
    const std::string cand = synthetic_scenario(rng, 24);
    const std::string ref = synthetic_scenario(rng, 24);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsgen::meteor(cand, ref));
    }
}
BENCHMARK(BM_Meteor);

}  // namespace

BENCHMARK_MAIN();
