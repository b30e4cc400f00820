#include "reference_scorers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

namespace {

std::vector<Tokens> ngrams(const Tokens& tokens, std::size_t n) {
    std::vector<Tokens> grams;
    if (tokens.size() < n) return grams;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        grams.emplace_back(tokens.begin() + static_cast<long>(i),
                           tokens.begin() + static_cast<long>(i + n));
    }
    return grams;
}

// Clipped matches by consuming reference occurrences one at a time.
std::size_t consume_matches(const std::vector<Tokens>& cand_grams,
                            std::vector<Tokens> ref_grams) {
    std::size_t matches = 0;
    for (const auto& gram : cand_grams) {
        const auto it = std::find(ref_grams.begin(), ref_grams.end(), gram);
        if (it != ref_grams.end()) {
            ref_grams.erase(it);
            ++matches;
        }
    }
    return matches;
}

std::string oracle_stem(const std::string& token) {
    const std::vector<std::string> suffixes = {"ing", "es", "ed", "en", "s", "n"};
    std::size_t letters = 0;
    for (const char c : token) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++letters;
    }
    for (const auto& suffix : suffixes) {
        if (token.size() > suffix.size() &&
            token.compare(token.size() - suffix.size(), suffix.size(), suffix) == 0 &&
            letters - suffix.size() >= 3) {
            return token.substr(0, token.size() - suffix.size());
        }
    }
    return token;
}

struct Best {
    std::size_t exact = 0;
    std::size_t stem = 0;
    std::size_t chunks = std::numeric_limits<std::size_t>::max();

    bool better_than(const Best& other) const {
        if (exact != other.exact) return exact > other.exact;
        if (stem != other.stem) return stem > other.stem;
        return chunks < other.chunks;
    }
};

// Exhaustive enumeration of injective alignments; lexicographic objective
// (max exact, then max stem, then min chunks).
void enumerate(const Tokens& cand, const Tokens& ref, std::size_t ci,
               std::vector<long>& assignment, std::vector<bool>& used, Best& best) {
    if (ci == cand.size()) {
        Best leaf;
        leaf.chunks = 0;
        long prev_rj = -2;
        bool in_chunk = false;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (assignment[i] < 0) {
                in_chunk = false;
                continue;
            }
            if (cand[i] == ref[static_cast<std::size_t>(assignment[i])]) ++leaf.exact;
            else ++leaf.stem;
            if (!(in_chunk && assignment[i] == prev_rj + 1)) ++leaf.chunks;
            in_chunk = true;
            prev_rj = assignment[i];
        }
        if (leaf.better_than(best)) best = leaf;
        return;
    }
    for (std::size_t rj = 0; rj < ref.size(); ++rj) {
        if (used[rj]) continue;
        const bool exact = cand[ci] == ref[rj];
        const bool stem_eq = !exact && oracle_stem(cand[ci]) == oracle_stem(ref[rj]);
        if (!exact && !stem_eq) continue;
        used[rj] = true;
        assignment[ci] = static_cast<long>(rj);
        enumerate(cand, ref, ci + 1, assignment, used, best);
        used[rj] = false;
    }
    assignment[ci] = -1;
    enumerate(cand, ref, ci + 1, assignment, used, best);
}

}  // namespace

double bleu(const Tokens& candidate, const Tokens& reference, std::size_t max_n) {
    if (candidate.empty() || reference.empty()) return 0.0;
    const std::size_t n_orders = std::min(max_n, candidate.size());
    double product = 1.0;
    for (std::size_t n = 1; n <= n_orders; ++n) {
        const auto cand_grams = ngrams(candidate, n);
        const std::size_t matches = consume_matches(cand_grams, ngrams(reference, n));
        if (matches == 0) return 0.0;
        product *= static_cast<double>(matches) / static_cast<double>(cand_grams.size());
    }
    const double geomean = std::pow(product, 1.0 / static_cast<double>(n_orders));
    const double bp =
        candidate.size() > reference.size()
            ? 1.0
            : std::exp(1.0 - static_cast<double>(reference.size()) /
                                 static_cast<double>(candidate.size()));
    return bp * geomean;
}

double rouge_n(const Tokens& candidate, const Tokens& reference, std::size_t n) {
    const auto ref_grams = ngrams(reference, n);
    if (ref_grams.empty()) return 0.0;
    const std::size_t matches = consume_matches(ngrams(candidate, n), ref_grams);
    return static_cast<double>(matches) / static_cast<double>(ref_grams.size());
}

double rouge_l(const Tokens& candidate, const Tokens& reference) {
    if (candidate.empty() || reference.empty()) return 0.0;
    std::vector<std::vector<std::size_t>> table(candidate.size() + 1,
                                                std::vector<std::size_t>(reference.size() + 1));
    for (std::size_t i = 1; i <= candidate.size(); ++i) {
        for (std::size_t j = 1; j <= reference.size(); ++j) {
            table[i][j] = candidate[i - 1] == reference[j - 1]
                              ? table[i - 1][j - 1] + 1
                              : std::max(table[i - 1][j], table[i][j - 1]);
        }
    }
    const auto lcs = static_cast<double>(table[candidate.size()][reference.size()]);
    const double recall = lcs / static_cast<double>(reference.size());
    const double precision = lcs / static_cast<double>(candidate.size());
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double meteor(const Tokens& candidate, const Tokens& reference) {
    if (candidate.empty() || reference.empty()) return 0.0;
    Best best;
    best.chunks = std::numeric_limits<std::size_t>::max();
    best.exact = 0;
    best.stem = 0;
    std::vector<long> assignment(candidate.size(), -1);
    std::vector<bool> used(reference.size(), false);
    Best winner;
    winner.chunks = std::numeric_limits<std::size_t>::max();
    enumerate(candidate, reference, 0, assignment, used, winner);

    const std::size_t m = winner.exact + winner.stem;
    if (m == 0) return 0.0;
    const double matches = static_cast<double>(m);
    const double precision = matches / static_cast<double>(candidate.size());
    const double recall = matches / static_cast<double>(reference.size());
    const double f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    const double penalty =
        0.5 * std::pow(static_cast<double>(winner.chunks) / matches, 3.0);
    return f_mean * (1.0 - penalty);
}

}  // namespace oracle
