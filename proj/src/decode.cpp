#include "genir/decode.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace genir {

std::vector<ItemId> RankedList::items() const {
    std::vector<ItemId> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.item);
    return out;
}

int BeamConfig::effective_groups() const {
    if (num_groups > 0) return num_groups;
    return (k + 1) / 2;
}

void BeamConfig::validate() const {
    if (k < 1) throw std::invalid_argument("beam: k must be >= 1");
    int groups = effective_groups();
    if (groups < 1 || groups > k) {
        throw std::invalid_argument("beam: need 1 <= num_groups <= k");
    }
    if (diversity_penalty < 0.0) {
        throw std::invalid_argument("beam: diversity_penalty must be >= 0");
    }
    if (max_depth < 1) throw std::invalid_argument("beam: max_depth must be >= 1");
}

RankedList top_k(const std::vector<double>& probabilities, int k) {
    if (k < 1) throw std::invalid_argument("top_k: k must be >= 1");
    if (probabilities.empty()) throw std::invalid_argument("top_k: empty distribution");
    const int n = static_cast<int>(probabilities.size());
    if (k > n) {
        std::cerr << "warning: top_k truncated from " << k << " to catalog size " << n
                  << "\n";
        k = n;
    }
    std::vector<ItemId> ids(probabilities.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<ItemId>(i);
    std::partial_sort(ids.begin(), ids.begin() + k, ids.end(),
                      [&](ItemId a, ItemId b) {
                          double pa = probabilities[static_cast<std::size_t>(a)];
                          double pb = probabilities[static_cast<std::size_t>(b)];
                          if (pa != pb) return pa > pb;
                          return a < b;
                      });
    RankedList list;
    list.k = k;
    list.entries.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        list.entries.push_back(
            {ids[static_cast<std::size_t>(i)],
             std::log(probabilities[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])])});
    }
    return list;
}

namespace {

struct Hypothesis {
    double augmented = 0.0;  // penalty-adjusted cumulative log-score
    double true_score = 0.0; // cumulative log-probability
    std::vector<TokenIndex> tokens;
};

struct HypothesisOrder {
    // max-heap on augmented score; deterministic tie-break on the token
    // sequence so results do not depend on heap internals
    bool operator()(const Hypothesis& a, const Hypothesis& b) const {
        if (a.augmented != b.augmented) return a.augmented < b.augmented;
        return a.tokens > b.tokens;
    }
};

struct Completed {
    ItemId item;
    double true_score;
    std::vector<TokenIndex> tokens;
};

// Exact top-`beam_size` terminal sequences under the augmented objective,
// skipping items already claimed. Best-first search is admissible because
// every step contributes a nonpositive augmented score.
std::vector<Completed> decode_group(
    const NextTokenScorer& scorer, const BeamConfig& cfg, int beam_size,
    const std::vector<std::unordered_map<TokenIndex, int>>& step_counts,
    const std::unordered_set<ItemId>& claimed_items) {
    std::priority_queue<Hypothesis, std::vector<Hypothesis>, HypothesisOrder> frontier;
    frontier.push(Hypothesis{});
    std::vector<Completed> completed;
    std::unordered_set<ItemId> emitted = claimed_items;
    const int vocab = scorer.token_count();
    std::vector<double> log_scores;
    std::vector<char> valid;

    while (!frontier.empty() && static_cast<int>(completed.size()) < beam_size) {
        Hypothesis hyp = frontier.top();
        frontier.pop();
        if (scorer.is_terminal(hyp.tokens)) {
            auto item = scorer.sequence_item(hyp.tokens);
            if (!item) {
                throw std::runtime_error(
                    "diverse_beam_search: terminal sequence maps to no item");
            }
            if (emitted.insert(*item).second) {
                completed.push_back({*item, hyp.true_score, hyp.tokens});
            }
            continue;
        }
        if (static_cast<int>(hyp.tokens.size()) >= cfg.max_depth) {
            continue;  // precondition violation; drop the unterminated path
        }
        log_scores.assign(static_cast<std::size_t>(vocab), 0.0);
        valid.assign(static_cast<std::size_t>(vocab), 0);
        scorer.next_scores(hyp.tokens, log_scores, valid);
        const std::size_t step = hyp.tokens.size();
        bool any_valid = false;
        for (int t = 0; t < vocab; ++t) {
            if (!valid[static_cast<std::size_t>(t)]) continue;
            double s = log_scores[static_cast<std::size_t>(t)];
            if (s > 1e-12) {
                throw std::invalid_argument(
                    "diverse_beam_search: scorer produced a positive log-score");
            }
            any_valid = true;
            double penalty = 0.0;
            if (step < step_counts.size()) {
                auto it = step_counts[step].find(t);
                if (it != step_counts[step].end()) {
                    penalty = cfg.diversity_penalty * static_cast<double>(it->second);
                }
            }
            Hypothesis next;
            next.tokens = hyp.tokens;
            next.tokens.push_back(t);
            next.true_score = hyp.true_score + s;
            next.augmented = hyp.augmented + s - penalty;
            frontier.push(std::move(next));
        }
        if (!any_valid) {
            throw std::runtime_error(
                "diverse_beam_search: all continuations masked at a non-terminal prefix");
        }
    }
    return completed;
}

}  // namespace

RankedList diverse_beam_search(const NextTokenScorer& scorer, const BeamConfig& cfg) {
    cfg.validate();
    const int groups = cfg.effective_groups();
    // Distribute K over the groups, first groups take the remainder.
    std::vector<int> group_sizes(static_cast<std::size_t>(groups), cfg.k / groups);
    for (int g = 0; g < cfg.k % groups; ++g) ++group_sizes[static_cast<std::size_t>(g)];

    std::vector<std::unordered_map<TokenIndex, int>> step_counts(
        static_cast<std::size_t>(cfg.max_depth));
    std::unordered_set<ItemId> claimed;
    std::vector<Completed> all_completed;
    for (int g = 0; g < groups; ++g) {
        if (group_sizes[static_cast<std::size_t>(g)] == 0) continue;
        std::vector<Completed> group_result = decode_group(
            scorer, cfg, group_sizes[static_cast<std::size_t>(g)], step_counts, claimed);
        for (const auto& c : group_result) {
            claimed.insert(c.item);
            for (std::size_t step = 0; step < c.tokens.size(); ++step) {
                ++step_counts[step][c.tokens[step]];
            }
            all_completed.push_back(c);
        }
    }

    // Items are distinct by construction; keep the best score per item anyway
    // before ranking by true log-probability.
    std::map<ItemId, double> best;
    for (const auto& c : all_completed) {
        auto [it, inserted] = best.emplace(c.item, c.true_score);
        if (!inserted && c.true_score > it->second) it->second = c.true_score;
    }
    std::vector<RankedEntry> entries;
    entries.reserve(best.size());
    for (const auto& [item, score] : best) entries.push_back({item, score});
    std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item < b.item;
    });
    if (static_cast<int>(entries.size()) > cfg.k) entries.resize(static_cast<std::size_t>(cfg.k));

    RankedList list;
    list.k = cfg.k;
    list.entries = std::move(entries);
    return list;
}

RankedList retrieve(const RetrieverParams& params, std::span<const TokenIndex> input,
                    int k) {
    return top_k(forward(params, input), k);
}

}  // namespace genir
