#include "tsgen/metrics.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/frozen_pairs.hpp"
#include "support/reference_scorers.hpp"
#include "tsgen/errors.hpp"

using namespace tsgen;

namespace {

MetricParams all_variants() {
    MetricParams params;
    params.rouge_variants = {RougeVariant::rouge_1, RougeVariant::rouge_2,
                             RougeVariant::rouge_l};
    return params;
}

std::string random_sentence(std::mt19937& rng, std::size_t max_len) {
    static const std::vector<std::string> vocab = {
        "the",  "cat",   "sat",  "on",     "mat",  "scan",   "packet", "switch",
        "rate", "mode",  "app",  "open",   "press", "verify", "18",     "%",
        "USt",  "ZAB",   "VB",   "Öffne",  "die",  "Modus",  ".",      ",",
        "and",  "turn",  "list", "town",   "flag", "detail"};
    std::string out;
    const std::size_t len = rng() % (max_len + 1);
    for (std::size_t i = 0; i < len; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += vocab[rng() % vocab.size()];
    }
    return out;
}

}  // namespace

// ===========================================================================
// metric_tokenize

TEST(MetricTokenize, LowercasesAndKeepsPunctuation) {
    EXPECT_EQ(metric_tokenize("The Cat."),
              (std::vector<std::string>{"the", "cat", "."}));
}

TEST(MetricTokenize, Empty) {
    EXPECT_TRUE(metric_tokenize("").empty());
}

TEST(MetricTokenize, SegmentsMixedTokens) {
    EXPECT_EQ(metric_tokenize("18% USt"),
              (std::vector<std::string>{"18", "%", "ust"}));
}

TEST(MetricTokenize, LowercaseOffPreservesCase) {
    MetricParams params;
    params.lowercase = false;
    EXPECT_EQ(metric_tokenize("The Cat", params),
              (std::vector<std::string>{"The", "Cat"}));
}

TEST(MetricTokenize, LowercasesUmlauts) {
    EXPECT_EQ(metric_tokenize("Änderung"), (std::vector<std::string>{"änderung"}));
}

// ===========================================================================
// BLEU

TEST(Bleu, PerfectMatchIsOne) {
    EXPECT_DOUBLE_EQ(bleu("the cat sat on the mat", "the cat sat on the mat").value, 1.0);
}

TEST(Bleu, WorkedExample) {
    // p = (5/5, 3/4, 2/3, 1/2), geomean 0.25^(1/4), BP = e^(1-6/5).
    EXPECT_NEAR(bleu("the cat sat on mat", "the cat sat on the mat").value, 0.578930, 1e-6);
}

TEST(Bleu, ZeroOverlapScoresZero) {
    EXPECT_DOUBLE_EQ(bleu("completely different words", "nothing shared here").value, 0.0);
}

TEST(Bleu, EmptyCandidateIsDegenerateZero) {
    const auto score = bleu("", "a reference");
    EXPECT_DOUBLE_EQ(score.value, 0.0);
    EXPECT_TRUE(score.degenerate);
}

TEST(Bleu, ShortCandidateCapsOrder) {
    // Candidate of one token: only unigram precision applies.
    EXPECT_NEAR(bleu("cat", "cat").value, 1.0, 1e-12);
}

TEST(Bleu, AppendingJunkStrictlyLowersPerfectScore) {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::string base = random_sentence(rng, 10);
        if (metric_tokenize(base).empty()) continue;
        const double perfect = bleu(base, base).value;
        const double damaged = bleu(base + " zzzunmatched", base).value;
        EXPECT_DOUBLE_EQ(perfect, 1.0) << base;
        EXPECT_LT(damaged, perfect) << base;
    }
}

TEST(Bleu, SmoothingRescuesZeroCounts) {
    MetricParams params;
    params.bleu_smoothing = true;
    const auto smoothed = bleu("the cat", "the dog", params);
    EXPECT_GT(smoothed.value, 0.0);
    EXPECT_LT(smoothed.value, 1.0);
}

// ===========================================================================
// ROUGE

TEST(Rouge, IdenticalTextsScoreOne) {
    EXPECT_DOUBLE_EQ(rouge("the cat sat", "the cat sat").value, 1.0);
}

TEST(Rouge, WorkedExampleLcsF1) {
    // LCS = 3, R = 3/4, P = 1, F1 = 6/7.
    EXPECT_NEAR(rouge("the cat sat", "the cat sat down").value, 0.857143, 1e-6);
}

TEST(Rouge, DisjointTokensScoreZero) {
    EXPECT_DOUBLE_EQ(rouge("alpha beta", "gamma delta").value, 0.0);
}

TEST(Rouge, EmptyReferenceIsDegenerateZero) {
    const auto score = rouge("candidate", "");
    EXPECT_DOUBLE_EQ(score.value, 0.0);
    EXPECT_TRUE(score.degenerate);
}

TEST(Rouge, VariantsExposedOnRequest) {
    const auto score = rouge("the cat sat on the mat", "the cat sat", all_variants());
    ASSERT_EQ(score.variants.count("rouge_1"), 1u);
    ASSERT_EQ(score.variants.count("rouge_2"), 1u);
    ASSERT_EQ(score.variants.count("rouge_l"), 1u);
    // Recall against the 3-token reference: all its unigrams and bigrams appear.
    EXPECT_DOUBLE_EQ(score.variants.at("rouge_1"), 1.0);
    EXPECT_DOUBLE_EQ(score.variants.at("rouge_2"), 1.0);
}

TEST(Rouge, DefaultParamsCarryRougeLOnly) {
    const auto score = rouge("a b", "a b");
    EXPECT_EQ(score.variants.size(), 1u);
    EXPECT_EQ(score.variants.count("rouge_l"), 1u);
}

// ===========================================================================
// METEOR

TEST(Meteor, WorkedExample) {
    // m = 5, P = 1, R = 5/6, F = 50/59, chunks = 2, penalty = 0.032.
    EXPECT_NEAR(meteor("the cat sat on mat", "the cat sat on the mat").value, 0.820339,
                1e-6);
}

TEST(Meteor, IdentityFormula) {
    // Single chunk: score = 1 - 0.5/m^3.
    EXPECT_NEAR(meteor("one two three four", "one two three four").value, 0.9921875, 1e-12);
    EXPECT_NEAR(meteor("a b", "a b").value, 1.0 - 0.5 / 8.0, 1e-12);
}

TEST(Meteor, ZeroMatchesScoresZero) {
    EXPECT_DOUBLE_EQ(meteor("alpha beta", "gamma delta").value, 0.0);
}

TEST(Meteor, EmptySideIsDegenerateZero) {
    EXPECT_TRUE(meteor("", "reference").degenerate);
    EXPECT_TRUE(meteor("candidate", "").degenerate);
    EXPECT_DOUBLE_EQ(meteor("", "reference").value, 0.0);
}

TEST(Meteor, StemMatchingAligns) {
    // "opened" and "opens" both stem to "open" but are not equal tokens.
    const double with_stem = meteor("opened packets", "opens the packets").value;
    EXPECT_GT(with_stem, meteor("zzz packets", "opens the packets").value);
}

TEST(Meteor, FewestChunksPreferred) {
    // "b" can match either occurrence; keeping the contiguous pairing gives
    // one chunk. With two chunks the penalty would be larger.
    const double score = meteor("a b", "a b x b").value;
    const double m = 2.0, p = 2.0 / 2.0, r = 2.0 / 4.0;
    const double f = 10.0 * p * r / (r + 9.0 * p);
    const double expected = f * (1.0 - 0.5 * std::pow(1.0 / m, 3.0));
    EXPECT_NEAR(score, expected, 1e-12);
}

// ===========================================================================
// cross-check against the brute-force reference scorers

TEST(MetricOracles, FrozenSuiteMatchesWithinTolerance) {
    const auto params = all_variants();
    for (const auto& [cand, ref] : testutil::frozen_pairs()) {
        const auto cand_tokens = metric_tokenize(cand, params);
        const auto ref_tokens = metric_tokenize(ref, params);
        EXPECT_NEAR(bleu(cand, ref, params).value, oracle::bleu(cand_tokens, ref_tokens),
                    1e-9)
            << cand << " | " << ref;
        const auto r = rouge(cand, ref, params);
        EXPECT_NEAR(r.value, oracle::rouge_l(cand_tokens, ref_tokens), 1e-9)
            << cand << " | " << ref;
        EXPECT_NEAR(r.variants.at("rouge_1"), oracle::rouge_n(cand_tokens, ref_tokens, 1),
                    1e-9);
        EXPECT_NEAR(r.variants.at("rouge_2"), oracle::rouge_n(cand_tokens, ref_tokens, 2),
                    1e-9);
        EXPECT_NEAR(meteor(cand, ref, params).value, oracle::meteor(cand_tokens, ref_tokens),
                    1e-9)
            << cand << " | " << ref;
    }
}

TEST(MetricOracles, RandomShortPairsMatchOracles) {
    std::mt19937 rng(29);
    const auto params = all_variants();
    for (int trial = 0; trial < 150; ++trial) {
        const std::string cand = random_sentence(rng, 7);
        const std::string ref = random_sentence(rng, 7);
        const auto cand_tokens = metric_tokenize(cand, params);
        const auto ref_tokens = metric_tokenize(ref, params);
        if (cand_tokens.empty() || ref_tokens.empty()) continue;
        EXPECT_NEAR(bleu(cand, ref, params).value, oracle::bleu(cand_tokens, ref_tokens),
                    1e-9)
            << cand << " | " << ref;
        EXPECT_NEAR(rouge(cand, ref, params).value, oracle::rouge_l(cand_tokens, ref_tokens),
                    1e-9)
            << cand << " | " << ref;
        EXPECT_NEAR(meteor(cand, ref, params).value, oracle::meteor(cand_tokens, ref_tokens),
                    1e-9)
            << cand << " | " << ref;
    }
}

// ===========================================================================
// score_pair / score_corpus

TEST(ScorePair, ConsistentWithIndividualScorers) {
    const auto params = all_variants();
    const std::string cand = "the cat sat on mat";
    const std::string ref = "the cat sat on the mat";
    const auto report = score_pair(cand, ref, params);
    EXPECT_DOUBLE_EQ(report.bleu, bleu(cand, ref, params).value);
    EXPECT_DOUBLE_EQ(report.rouge, rouge(cand, ref, params).value);
    EXPECT_DOUBLE_EQ(report.meteor, meteor(cand, ref, params).value);
    EXPECT_EQ(report.detail.count("rouge_1"), 1u);
}

TEST(ScoreCorpus, MeanOfPairScores) {
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"the cat sat on mat", "the cat sat on the mat"},
        {"the cat sat on the mat", "the cat sat on the mat"},
    };
    const auto corpus = score_corpus(pairs);
    const auto first = score_pair(pairs[0].first, pairs[0].second);
    const auto second = score_pair(pairs[1].first, pairs[1].second);
    EXPECT_NEAR(corpus.bleu, (first.bleu + second.bleu) / 2.0, 1e-12);
    EXPECT_NEAR(corpus.rouge, (first.rouge + second.rouge) / 2.0, 1e-12);
    EXPECT_NEAR(corpus.meteor, (first.meteor + second.meteor) / 2.0, 1e-12);
}

TEST(ScoreCorpus, IdenticalPairsEqualSinglePair) {
    const std::vector<std::pair<std::string, std::string>> pairs(
        3, {"scan the packet", "scan the packet now"});
    const auto corpus = score_corpus(pairs);
    const auto single = score_pair(pairs[0].first, pairs[0].second);
    EXPECT_NEAR(corpus.bleu, single.bleu, 1e-12);
    EXPECT_NEAR(corpus.rouge, single.rouge, 1e-12);
    EXPECT_NEAR(corpus.meteor, single.meteor, 1e-12);
}

TEST(ScoreCorpus, EmptyCorpusIsAnError) {
    EXPECT_THROW(score_corpus({}), ValidationError);
}

TEST(ScoreCorpus, CorpusLevelBleuFlag) {
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"the cat", "the cat"},
        {"a dog runs", "a cat runs"},
    };
    const auto mean = score_corpus(pairs, {}, false);
    const auto corpus = score_corpus(pairs, {}, true);
    EXPECT_EQ(corpus.detail.count("bleu_sentence_mean"), 1u);
    EXPECT_NEAR(corpus.detail.at("bleu_sentence_mean"), mean.bleu, 1e-12);
    EXPECT_GE(corpus.bleu, 0.0);
    EXPECT_LE(corpus.bleu, 1.0);
}

TEST(MetricRange, RandomPairsStayInUnitInterval) {
    std::mt19937 rng(31);
    const auto params = all_variants();
    for (int trial = 0; trial < 1000; ++trial) {
        const std::string cand = random_sentence(rng, 20);
        const std::string ref = random_sentence(rng, 20);
        const auto report = score_pair(cand, ref, params);
        EXPECT_GE(report.bleu, 0.0);
        EXPECT_LE(report.bleu, 1.0);
        EXPECT_GE(report.rouge, 0.0);
        EXPECT_LE(report.rouge, 1.0);
        EXPECT_GE(report.meteor, 0.0);
        EXPECT_LE(report.meteor, 1.0);
    }
}
