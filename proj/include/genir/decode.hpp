#pragma once
// Retrieval-time decoding. Atomic single-token IDs use an exact top-K over
// the item softmax; multi-token ID sequences go through a constrained,
// group-diversified best-first beam search that returns the true top
// sequences under the (penalty-adjusted) log-probability objective.

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "genir/corpus.hpp"
#include "genir/retriever.hpp"

namespace genir {

struct RankedEntry {
    ItemId item = 0;
    double score = 0.0;  // log-probability
};

struct RankedList {
    std::vector<RankedEntry> entries;  // scores non-increasing, items distinct
    int k = 0;

    std::vector<ItemId> items() const;
};

struct BeamConfig {
    int k = 10;
    int num_groups = 0;  // 0 = ceil(k / 2)
    double diversity_penalty = 0.25;
    int max_depth = 8;

    int effective_groups() const;
    void validate() const;
};

// Scoring interface for sequence decoding. Log-scores must be <= 0 (they
// are log-probabilities); masked tokens are treated as -inf. A terminal
// prefix is complete and is never extended.
class NextTokenScorer {
public:
    virtual ~NextTokenScorer() = default;
    virtual int token_count() const = 0;
    virtual bool is_terminal(std::span<const TokenIndex> prefix) const = 0;
    virtual void next_scores(std::span<const TokenIndex> prefix,
                             std::vector<double>& log_scores,
                             std::vector<char>& valid) const = 0;
    virtual std::optional<ItemId> sequence_item(std::span<const TokenIndex> sequence) const = 0;
};

// K highest-probability items, ties broken by ascending item id; scores are
// log-probabilities. K beyond the catalog is truncated with a warning.
RankedList top_k(const std::vector<double>& probabilities, int k);

// Groups decoded sequentially; within each step a token already chosen at
// that step by earlier groups is penalized by diversity_penalty per choice,
// and items already returned by earlier groups are masked so every group
// contributes new items. Final ranking is by true log-probability.
RankedList diverse_beam_search(const NextTokenScorer& scorer, const BeamConfig& cfg);

// forward + top_k: the plumbing path used by the evaluation runs.
RankedList retrieve(const RetrieverParams& params, std::span<const TokenIndex> input,
                    int k);

}  // namespace genir
