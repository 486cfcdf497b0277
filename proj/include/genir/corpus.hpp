#pragma once
// Vocabularies, dataset containers, split logic, and the conversion of
// search records and user histories into uniform training instances.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace genir {

using ItemId = std::int32_t;      // dense catalog index in [0, num_items)
using TokenIndex = std::int32_t;  // index into a Vocabulary

enum class Task { Search, Rec };

enum class Split { Train, Validation, Test };

const char* to_string(Task task);
const char* to_string(Split split);
Split split_from_string(const std::string& s);

// Token index space is laid out as three contiguous segments:
//   [0, 3)                      specials PAD, SEP, EOS
//   [3, 3 + num_text)           sorted text tokens
//   [3 + num_text, total)       one token per item, ordered by ItemId
class Vocabulary {
public:
    static constexpr TokenIndex kPad = 0;
    static constexpr TokenIndex kSep = 1;
    static constexpr TokenIndex kEos = 2;
    static constexpr int kNumSpecials = 3;

    Vocabulary() = default;
    Vocabulary(std::vector<std::string> text_tokens, int num_items);

    int size() const { return kNumSpecials + num_text_tokens() + num_items_; }
    int num_text_tokens() const { return static_cast<int>(text_tokens_.size()); }
    int num_items() const { return num_items_; }

    // phi: item -> its dedicated token index (atomic IDs).
    TokenIndex item_token(ItemId item) const;
    // Inverse of item_token; nullopt for non-item tokens.
    std::optional<ItemId> token_item(TokenIndex token) const;
    bool is_item_token(TokenIndex token) const;

    std::optional<TokenIndex> text_token(const std::string& word) const;
    const std::string& token_string(TokenIndex token) const;

    // Lowercase, split on whitespace/punctuation, drop out-of-vocabulary words.
    std::vector<TokenIndex> tokenize(const std::string& text) const;

    // FNV-1a over the token strings; used to validate checkpoints.
    std::uint64_t content_hash() const;

private:
    std::vector<std::string> text_tokens_;  // sorted, deduplicated
    std::unordered_map<std::string, TokenIndex> text_lookup_;
    int num_items_ = 0;
    mutable std::vector<std::string> token_strings_;  // lazily built cache
};

// Lowercased alphanumeric words of a text, in order.
std::vector<std::string> tokenize_words(const std::string& text);

struct SearchRecord {
    std::string query;
    std::vector<ItemId> relevant;  // nonempty, no duplicates
    Split split = Split::Train;

    bool operator==(const SearchRecord&) const = default;
};

struct SearchDataset {
    int num_items = 0;
    std::vector<SearchRecord> records;

    std::vector<const SearchRecord*> records_in(Split split) const;
    bool operator==(const SearchDataset&) const = default;
};

struct RecUser {
    int user_id = 0;
    std::vector<ItemId> interactions;  // time-ordered, length t
};

inline bool operator==(const RecUser& a, const RecUser& b) {
    return a.user_id == b.user_id && a.interactions == b.interactions;
}

struct RecDataset {
    int num_items = 0;
    std::vector<RecUser> users;

    bool operator==(const RecDataset&) const = default;
};

struct TrainingInstance {
    std::vector<TokenIndex> input;
    TokenIndex target = 0;  // always an item-ID token
    Task task = Task::Search;

    bool operator==(const TrainingInstance&) const = default;
};

struct RecSplitResult {
    std::vector<TrainingInstance> train;
    std::vector<TrainingInstance> validation;
    std::vector<TrainingInstance> test;
    // Index of the user each test/validation instance came from, parallel
    // to the instance vectors (one instance per user for those splits).
    std::vector<int> test_user;
    std::vector<int> validation_user;
    int skipped_users = 0;  // users with t < 5
};

// Union catalog + whitespace-tokenized lowercased query words, sorted, plus
// one item token per catalog item. Throws on an empty catalog.
Vocabulary build_vocabulary(const SearchDataset& search, const RecDataset& rec);

// One instance per (query, relevant item) pair for the requested split.
// Throws if a query has zero in-vocabulary tokens.
std::vector<TrainingInstance> search_instances(const SearchDataset& data,
                                               const Vocabulary& vocab,
                                               Split split = Split::Train);

// Leave-three-out split: test predicts position t, validation t-1, and the
// train instances predict positions 3..t-2, so histories shrink until only
// two items remain. Users with t < 5 are skipped (counted in the result).
RecSplitResult rec_split(const RecDataset& data, const Vocabulary& vocab);

struct JointOptions {
    int search_oversample = 1;  // repeat factor for search instances
    int rec_oversample = 1;
    std::uint64_t seed = 0;
};

// Shuffled union of the two instance lists, deterministic per seed.
// Validates all token indices against the vocabulary.
std::vector<TrainingInstance> joint_instances(
    const std::vector<TrainingInstance>& search,
    const std::vector<TrainingInstance>& rec,
    const Vocabulary& vocab,
    const JointOptions& opts = {});

// Checks the "all test items appear in the training set of their own task"
// condition; returns the offending items (empty means valid).
std::vector<ItemId> validate_test_coverage(
    const std::vector<TrainingInstance>& train,
    const std::vector<TrainingInstance>& test,
    const Vocabulary& vocab);

}  // namespace genir
