#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsgen {

enum class RougeVariant { rouge_1, rouge_2, rouge_l };

struct MetricParams {
    std::size_t bleu_max_n = 4;
    std::set<RougeVariant> rouge_variants{RougeVariant::rouge_l};
    // F_mean = P*R / (alpha*P + (1-alpha)*R); penalty = gamma*(chunks/m)^beta.
    double meteor_alpha = 0.9;
    double meteor_beta = 3.0;
    double meteor_gamma = 0.5;
    bool lowercase = true;
    bool bleu_smoothing = false;          // floor empty n-gram matches at epsilon
    double bleu_smoothing_epsilon = 0.1;
};

// Lowercase (unless disabled), then the shared tokenizer rule; punctuation
// tokens are retained.
std::vector<std::string> metric_tokenize(std::string_view text,
                                         const MetricParams& params = {});

struct MetricScore {
    double value = 0.0;
    bool degenerate = false;  // an empty side forced the score
};

// Modified n-gram precision with clipping, geometric mean over n = 1..N with
// N = min(bleu_max_n, candidate length), brevity penalty exp(1 - r/c) for
// short candidates. Any empty p_n zeroes the score unless smoothing is on.
MetricScore bleu(std::string_view candidate, std::string_view reference,
                 const MetricParams& params = {});

struct RougeScore {
    double value = 0.0;  // headline: ROUGE-L F1
    std::map<std::string, double> variants;
    bool degenerate = false;
};

// ROUGE-N recall (clipped overlap / reference n-gram count) and ROUGE-L as
// the F1 of the longest common subsequence.
RougeScore rouge(std::string_view candidate, std::string_view reference,
                 const MetricParams& params = {});

// Exact matches first, then stem matches (light suffix stemmer), each token
// matched at most once; among maximum alignments the one with the fewest
// chunks. F_mean weighted toward recall, times a fragmentation penalty.
MetricScore meteor(std::string_view candidate, std::string_view reference,
                   const MetricParams& params = {});

struct MetricReport {
    double bleu = 0.0;
    double rouge = 0.0;   // ROUGE-L F1
    double meteor = 0.0;
    std::map<std::string, double> detail;
    bool degenerate = false;
};

MetricReport score_pair(std::string_view candidate, std::string_view reference,
                        const MetricParams& params = {});

// Arithmetic mean of per-pair scores, summed in input order. With
// corpus_level_bleu, BLEU instead aggregates n-gram statistics over all
// pairs; the sentence mean is kept in the detail map.
MetricReport score_corpus(std::span<const std::pair<std::string, std::string>> pairs,
                          const MetricParams& params = {}, bool corpus_level_bleu = false);

}  // namespace tsgen
