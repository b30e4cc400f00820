#include "tsgen/metrics.hpp"

#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "tsgen/errors.hpp"
#include "tsgen/unicode.hpp"

namespace tsgen {

namespace {

using Tokens = std::vector<std::string>;

// ---------------------------------------------------------------------------
// n-gram helpers

std::map<std::string, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
    std::map<std::string, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (std::size_t j = 0; j < n; ++j) {
            if (j > 0) key.push_back('\x1f');
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

std::size_t clipped_matches(const std::map<std::string, std::size_t>& cand,
                            const std::map<std::string, std::size_t>& ref) {
    std::size_t matches = 0;
    for (const auto& [gram, count] : cand) {
        const auto it = ref.find(gram);
        if (it != ref.end()) matches += std::min(count, it->second);
    }
    return matches;
}

double brevity_penalty(std::size_t c, std::size_t r) {
    if (c > r) return 1.0;
    return std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
}

MetricScore bleu_tokens(const Tokens& cand, const Tokens& ref, const MetricParams& params) {
    if (cand.empty() || ref.empty()) return {0.0, true};
    const std::size_t max_n = std::min(params.bleu_max_n, cand.size());
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        const auto cand_counts = ngram_counts(cand, n);
        std::size_t total = 0;
        for (const auto& [gram, count] : cand_counts) total += count;
        const std::size_t matches = clipped_matches(cand_counts, ngram_counts(ref, n));
        double p = static_cast<double>(matches) / static_cast<double>(total);
        if (matches == 0) {
            if (!params.bleu_smoothing) return {0.0, false};
            p = params.bleu_smoothing_epsilon / static_cast<double>(total);
        }
        log_sum += std::log(p);
    }
    const double geomean = std::exp(log_sum / static_cast<double>(max_n));
    const double score = brevity_penalty(cand.size(), ref.size()) * geomean;
    return {std::clamp(score, 0.0, 1.0), false};
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

RougeScore rouge_tokens(const Tokens& cand, const Tokens& ref, const MetricParams& params) {
    RougeScore score;
    score.degenerate = cand.empty() || ref.empty();

    auto rouge_n = [&](std::size_t n) {
        const auto ref_counts = ngram_counts(ref, n);
        std::size_t ref_total = 0;
        for (const auto& [gram, count] : ref_counts) ref_total += count;
        if (ref_total == 0) return 0.0;
        return static_cast<double>(clipped_matches(ngram_counts(cand, n), ref_counts)) /
               static_cast<double>(ref_total);
    };

    if (params.rouge_variants.count(RougeVariant::rouge_1) != 0) {
        score.variants["rouge_1"] = rouge_n(1);
    }
    if (params.rouge_variants.count(RougeVariant::rouge_2) != 0) {
        score.variants["rouge_2"] = rouge_n(2);
    }

    double f1 = 0.0;
    if (!cand.empty() && !ref.empty()) {
        const auto lcs = static_cast<double>(lcs_length(cand, ref));
        const double recall = lcs / static_cast<double>(ref.size());
        const double precision = lcs / static_cast<double>(cand.size());
        if (precision + recall > 0.0) {
            f1 = 2.0 * precision * recall / (precision + recall);
        }
    }
    score.variants["rouge_l"] = f1;
    score.value = f1;
    return score;
}

// ---------------------------------------------------------------------------
// METEOR alignment
//
// Match classes: exact token equality, then stem equality over the leftover
// occurrences. Maximum match counts per class are fixed by the token
// multisets; the search below only decides which occurrences pair up so the
// number of chunks (runs contiguous in both texts) is minimal.

std::string stem(const std::string& token) {
    static constexpr std::string_view suffixes[] = {"ing", "es", "ed", "en", "s", "n"};
    const std::size_t cp_len = [&] {
        std::size_t n = 0;
        for (char c : token) {
            if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
        }
        return n;
    }();
    for (const auto suffix : suffixes) {
        if (token.size() > suffix.size() && token.ends_with(suffix) &&
            cp_len >= suffix.size() + 3) {
            return token.substr(0, token.size() - suffix.size());
        }
    }
    return token;
}

struct AlignmentResult {
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

class AlignmentSearch {
public:
    AlignmentSearch(const Tokens& cand, const Tokens& ref) : cand_(cand), ref_(ref) {
        // Exact quota per word type: min of the two occurrence counts.
        std::map<std::string, std::size_t> cand_count, ref_count;
        for (const auto& t : cand) ++cand_count[t];
        for (const auto& t : ref) ++ref_count[t];
        for (const auto& [word, c] : cand_count) {
            const auto it = ref_count.find(word);
            if (it != ref_count.end()) target_exact_ += std::min(c, it->second);
        }
        // Stem quota over the leftovers, per stem class.
        std::map<std::string, std::size_t> left_cand, left_ref;
        for (const auto& [word, c] : cand_count) {
            const auto it = ref_count.find(word);
            const std::size_t used = it == ref_count.end() ? 0 : std::min(c, it->second);
            if (c > used) left_cand[stem(word)] += c - used;
        }
        for (const auto& [word, c] : ref_count) {
            const auto it = cand_count.find(word);
            const std::size_t used = it == cand_count.end() ? 0 : std::min(c, it->second);
            if (c > used) left_ref[stem(word)] += c - used;
        }
        for (const auto& [s, c] : left_cand) {
            const auto it = left_ref.find(s);
            if (it != left_ref.end()) target_stem_ += std::min(c, it->second);
        }

        // Candidate partners: exact matches and cross-type stem matches.
        exact_.resize(cand.size());
        stems_.resize(cand.size());
        for (std::size_t i = 0; i < cand.size(); ++i) {
            for (std::size_t j = 0; j < ref.size(); ++j) {
                if (cand[i] == ref[j]) {
                    exact_[i].push_back(j);
                } else if (stem(cand[i]) == stem(ref[j])) {
                    stems_[i].push_back(j);
                }
            }
        }
    }

    AlignmentResult run() {
        const std::size_t target = target_exact_ + target_stem_;
        if (target == 0) return {0, 0};
        used_.assign(ref_.size(), false);
        best_chunks_ = target + 1;
        found_ = false;
        nodes_ = 0;
        descend(0, 0, 0, npos, npos, 0);
        if (found_) return {target, best_chunks_};
        // Node budget exhausted without reaching the quota (adversarially
        // repetitive inputs): fall back to a chunk-preferring greedy pass.
        return greedy();
    }

    std::size_t target_matches() const { return target_exact_ + target_stem_; }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    static constexpr std::size_t kNodeBudget = 200000;

    void descend(std::size_t ci, std::size_t exact, std::size_t stem_count,
                 std::size_t last_ci, std::size_t last_rj, std::size_t chunks) {
        if (chunks >= best_chunks_ || nodes_ > kNodeBudget) return;
        ++nodes_;
        const std::size_t matched = exact + stem_count;
        if (matched + (cand_.size() - ci) < target_exact_ + target_stem_) return;
        if (ci == cand_.size()) {
            if (exact == target_exact_ && stem_count == target_stem_) {
                best_chunks_ = std::min(best_chunks_, chunks);
                found_ = true;
            }
            return;
        }

        auto try_partner = [&](std::size_t rj, bool is_exact) {
            if (used_[rj]) return;
            const bool contiguous = last_ci != npos && ci == last_ci + 1 && rj == last_rj + 1;
            used_[rj] = true;
            descend(ci + 1, exact + (is_exact ? 1 : 0), stem_count + (is_exact ? 0 : 1), ci,
                    rj, chunks + (contiguous ? 0 : 1));
            used_[rj] = false;
        };

        // Chunk-continuing partner first so the first full solution is greedy.
        const std::size_t continue_rj =
            (last_ci != npos && ci == last_ci + 1) ? last_rj + 1 : npos;
        for (const std::size_t rj : exact_[ci]) {
            if (rj == continue_rj) try_partner(rj, true);
        }
        for (const std::size_t rj : stems_[ci]) {
            if (rj == continue_rj) try_partner(rj, false);
        }
        for (const std::size_t rj : exact_[ci]) {
            if (rj != continue_rj) try_partner(rj, true);
        }
        for (const std::size_t rj : stems_[ci]) {
            if (rj != continue_rj) try_partner(rj, false);
        }
        descend(ci + 1, exact, stem_count, last_ci, last_rj, chunks);
    }

    AlignmentResult greedy() {
        used_.assign(ref_.size(), false);
        std::size_t matches = 0, chunks = 0;
        std::size_t last_ci = npos, last_rj = npos;
        for (std::size_t ci = 0; ci < cand_.size(); ++ci) {
            const std::size_t continue_rj =
                (last_ci != npos && ci == last_ci + 1) ? last_rj + 1 : npos;
            std::size_t pick = npos;
            bool contiguous = false;
            for (const std::size_t rj : exact_[ci]) {
                if (used_[rj]) continue;
                if (rj == continue_rj) {
                    pick = rj;
                    contiguous = true;
                    break;
                }
                if (pick == npos) pick = rj;
            }
            if (!contiguous) {
                for (const std::size_t rj : stems_[ci]) {
                    if (used_[rj]) continue;
                    if (rj == continue_rj) {
                        pick = rj;
                        contiguous = true;
                        break;
                    }
                    if (pick == npos) pick = rj;
                }
            }
            if (pick == npos) continue;
            used_[pick] = true;
            ++matches;
            if (!contiguous) ++chunks;
            last_ci = ci;
            last_rj = pick;
        }
        return {matches, chunks};
    }

    const Tokens& cand_;
    const Tokens& ref_;
    std::vector<std::vector<std::size_t>> exact_;
    std::vector<std::vector<std::size_t>> stems_;
    std::vector<bool> used_;
    std::size_t target_exact_ = 0;
    std::size_t target_stem_ = 0;
    std::size_t best_chunks_ = 0;
    std::size_t nodes_ = 0;
    bool found_ = false;
};

MetricScore meteor_tokens(const Tokens& cand, const Tokens& ref, const MetricParams& params) {
    if (cand.empty() || ref.empty()) return {0.0, true};
    AlignmentSearch search(cand, ref);
    const AlignmentResult aligned = search.run();
    if (aligned.matches == 0) return {0.0, false};

    const double m = static_cast<double>(aligned.matches);
    const double precision = m / static_cast<double>(cand.size());
    const double recall = m / static_cast<double>(ref.size());
    const double f_mean =
        precision * recall /
        (params.meteor_alpha * precision + (1.0 - params.meteor_alpha) * recall);
    const double fragmentation = static_cast<double>(aligned.chunks) / m;
    const double penalty = params.meteor_gamma * std::pow(fragmentation, params.meteor_beta);
    return {std::clamp(f_mean * (1.0 - penalty), 0.0, 1.0), false};
}

}  // namespace

std::vector<std::string> metric_tokenize(std::string_view text, const MetricParams& params) {
    if (params.lowercase) return tokenize(lowercase(text));
    return tokenize(text);
}

MetricScore bleu(std::string_view candidate, std::string_view reference,
                 const MetricParams& params) {
    return bleu_tokens(metric_tokenize(candidate, params), metric_tokenize(reference, params),
                       params);
}

RougeScore rouge(std::string_view candidate, std::string_view reference,
                 const MetricParams& params) {
    return rouge_tokens(metric_tokenize(candidate, params), metric_tokenize(reference, params),
                        params);
}

MetricScore meteor(std::string_view candidate, std::string_view reference,
                   const MetricParams& params) {
    return meteor_tokens(metric_tokenize(candidate, params),
                         metric_tokenize(reference, params), params);
}

MetricReport score_pair(std::string_view candidate, std::string_view reference,
                        const MetricParams& params) {
    const Tokens cand = metric_tokenize(candidate, params);
    const Tokens ref = metric_tokenize(reference, params);

    MetricReport report;
    const MetricScore b = bleu_tokens(cand, ref, params);
    const RougeScore r = rouge_tokens(cand, ref, params);
    const MetricScore m = meteor_tokens(cand, ref, params);
    report.bleu = b.value;
    report.rouge = r.value;
    report.meteor = m.value;
    report.detail["bleu"] = b.value;
    for (const auto& [k, v] : r.variants) report.detail[k] = v;
    report.detail["meteor"] = m.value;
    report.degenerate = b.degenerate || r.degenerate || m.degenerate;
    return report;
}

MetricReport score_corpus(std::span<const std::pair<std::string, std::string>> pairs,
                          const MetricParams& params, bool corpus_level_bleu) {
    if (pairs.empty()) throw ValidationError("cannot score an empty corpus");

    MetricReport corpus;
    std::map<std::string, double> sums;
    bool any_degenerate = false;
    for (const auto& [cand, ref] : pairs) {
        const MetricReport r = score_pair(cand, ref, params);
        for (const auto& [k, v] : r.detail) sums[k] += v;
        any_degenerate = any_degenerate || r.degenerate;
    }
    const auto n = static_cast<double>(pairs.size());
    for (const auto& [k, v] : sums) corpus.detail[k] = v / n;
    corpus.bleu = corpus.detail["bleu"];
    corpus.rouge = corpus.detail["rouge_l"];
    corpus.meteor = corpus.detail["meteor"];
    corpus.degenerate = any_degenerate;

    if (corpus_level_bleu) {
        // Aggregate n-gram statistics over the whole corpus.
        std::vector<std::size_t> matches(params.bleu_max_n, 0), totals(params.bleu_max_n, 0);
        std::size_t c_total = 0, r_total = 0;
        for (const auto& [cand_text, ref_text] : pairs) {
            const Tokens cand = metric_tokenize(cand_text, params);
            const Tokens ref = metric_tokenize(ref_text, params);
            c_total += cand.size();
            r_total += ref.size();
            for (std::size_t ni = 0; ni < params.bleu_max_n; ++ni) {
                const auto cand_counts = ngram_counts(cand, ni + 1);
                for (const auto& [gram, count] : cand_counts) totals[ni] += count;
                matches[ni] += clipped_matches(cand_counts, ngram_counts(ref, ni + 1));
            }
        }
        corpus.detail["bleu_sentence_mean"] = corpus.bleu;
        double log_sum = 0.0;
        bool zero = c_total == 0;
        std::size_t used_orders = 0;
        for (std::size_t ni = 0; ni < params.bleu_max_n && !zero; ++ni) {
            if (totals[ni] == 0) break;  // corpus shorter than the order
            ++used_orders;
            double p = static_cast<double>(matches[ni]) / static_cast<double>(totals[ni]);
            if (matches[ni] == 0) {
                if (!params.bleu_smoothing) {
                    zero = true;
                    break;
                }
                p = params.bleu_smoothing_epsilon / static_cast<double>(totals[ni]);
            }
            log_sum += std::log(p);
        }
        double value = 0.0;
        if (!zero && used_orders > 0) {
            value = brevity_penalty(c_total, r_total) *
                    std::exp(log_sum / static_cast<double>(used_orders));
        }
        corpus.bleu = std::clamp(value, 0.0, 1.0);
        corpus.detail["bleu"] = corpus.bleu;
    }
    return corpus;
}

}  // namespace tsgen
