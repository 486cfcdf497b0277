#include "genir/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "genir/rng.hpp"

namespace genir {

const char* to_string(Task task) {
    return task == Task::Search ? "search" : "rec";
}

const char* to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        default: return "test";
    }
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "validation") return Split::Validation;
    if (s == "test") return Split::Test;
    throw std::invalid_argument("unknown split: " + s);
}

std::vector<std::string> tokenize_words(const std::string& text) {
    std::vector<std::string> words;
    std::string current;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

Vocabulary::Vocabulary(std::vector<std::string> text_tokens, int num_items)
    : text_tokens_(std::move(text_tokens)), num_items_(num_items) {
    if (num_items_ <= 0) {
        throw std::invalid_argument("vocabulary requires a nonempty catalog");
    }
    std::sort(text_tokens_.begin(), text_tokens_.end());
    text_tokens_.erase(std::unique(text_tokens_.begin(), text_tokens_.end()),
                       text_tokens_.end());
    text_lookup_.reserve(text_tokens_.size());
    for (std::size_t i = 0; i < text_tokens_.size(); ++i) {
        text_lookup_.emplace(text_tokens_[i],
                             kNumSpecials + static_cast<TokenIndex>(i));
    }
}

TokenIndex Vocabulary::item_token(ItemId item) const {
    if (item < 0 || item >= num_items_) {
        throw std::out_of_range("item id out of range: " + std::to_string(item));
    }
    return kNumSpecials + num_text_tokens() + item;
}

std::optional<ItemId> Vocabulary::token_item(TokenIndex token) const {
    TokenIndex base = kNumSpecials + num_text_tokens();
    if (token < base || token >= base + num_items_) return std::nullopt;
    return token - base;
}

bool Vocabulary::is_item_token(TokenIndex token) const {
    return token_item(token).has_value();
}

std::optional<TokenIndex> Vocabulary::text_token(const std::string& word) const {
    auto it = text_lookup_.find(word);
    if (it == text_lookup_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocabulary::token_string(TokenIndex token) const {
    if (token < 0 || token >= size()) {
        throw std::out_of_range("token index out of range");
    }
    if (token_strings_.empty()) {
        token_strings_.reserve(size());
        token_strings_.emplace_back("<pad>");
        token_strings_.emplace_back("<sep>");
        token_strings_.emplace_back("<eos>");
        for (const auto& w : text_tokens_) token_strings_.push_back(w);
        for (int i = 0; i < num_items_; ++i) {
            token_strings_.push_back("<item_" + std::to_string(i) + ">");
        }
    }
    return token_strings_[static_cast<std::size_t>(token)];
}

std::vector<TokenIndex> Vocabulary::tokenize(const std::string& text) const {
    std::vector<TokenIndex> out;
    for (const auto& word : tokenize_words(text)) {
        if (auto tok = text_token(word)) out.push_back(*tok);
    }
    return out;
}

std::uint64_t Vocabulary::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f;  // separator
        h *= 0x100000001b3ULL;
    };
    for (const auto& t : text_tokens_) mix(t);
    h ^= static_cast<std::uint64_t>(num_items_);
    return splitmix64(h);
}

std::vector<const SearchRecord*> SearchDataset::records_in(Split split) const {
    std::vector<const SearchRecord*> out;
    for (const auto& r : records) {
        if (r.split == split) out.push_back(&r);
    }
    return out;
}

Vocabulary build_vocabulary(const SearchDataset& search, const RecDataset& rec) {
    int num_items = std::max(search.num_items, rec.num_items);
    if (num_items <= 0) {
        throw std::invalid_argument("build_vocabulary: empty catalog");
    }
    std::set<std::string> words;
    for (const auto& record : search.records) {
        for (auto& w : tokenize_words(record.query)) words.insert(std::move(w));
    }
    return Vocabulary(std::vector<std::string>(words.begin(), words.end()),
                      num_items);
}

std::vector<TrainingInstance> search_instances(const SearchDataset& data,
                                               const Vocabulary& vocab,
                                               Split split) {
    std::vector<TrainingInstance> out;
    for (const auto& record : data.records) {
        if (record.split != split) continue;
        std::vector<TokenIndex> tokens = vocab.tokenize(record.query);
        if (tokens.empty()) {
            throw std::runtime_error(
                "search_instances: query has no in-vocabulary tokens: \"" +
                record.query + "\"");
        }
        for (ItemId item : record.relevant) {
            out.push_back({tokens, vocab.item_token(item), Task::Search});
        }
    }
    return out;
}

RecSplitResult rec_split(const RecDataset& data, const Vocabulary& vocab) {
    RecSplitResult result;
    for (std::size_t u = 0; u < data.users.size(); ++u) {
        const auto& interactions = data.users[u].interactions;
        const int t = static_cast<int>(interactions.size());
        if (t < 5) {
            ++result.skipped_users;
            continue;
        }
        auto prefix_tokens = [&](int len) {
            std::vector<TokenIndex> input;
            input.reserve(static_cast<std::size_t>(len));
            for (int i = 0; i < len; ++i) {
                input.push_back(vocab.item_token(interactions[static_cast<std::size_t>(i)]));
            }
            return input;
        };
        // Targets at 1-based positions 3..t-2 form the train split.
        for (int k = 3; k <= t - 2; ++k) {
            result.train.push_back({prefix_tokens(k - 1),
                                    vocab.item_token(interactions[static_cast<std::size_t>(k - 1)]),
                                    Task::Rec});
        }
        result.validation.push_back({prefix_tokens(t - 2),
                                     vocab.item_token(interactions[static_cast<std::size_t>(t - 2)]),
                                     Task::Rec});
        result.validation_user.push_back(static_cast<int>(u));
        result.test.push_back({prefix_tokens(t - 1),
                               vocab.item_token(interactions[static_cast<std::size_t>(t - 1)]),
                               Task::Rec});
        result.test_user.push_back(static_cast<int>(u));
    }
    return result;
}

namespace {

void validate_against_vocab(const std::vector<TrainingInstance>& instances,
                            const Vocabulary& vocab, const char* label) {
    for (const auto& inst : instances) {
        for (TokenIndex tok : inst.input) {
            if (tok < 0 || tok >= vocab.size()) {
                throw std::invalid_argument(
                    std::string("joint_instances: ") + label +
                    " instance has a token outside the vocabulary");
            }
        }
        if (!vocab.is_item_token(inst.target)) {
            throw std::invalid_argument(
                std::string("joint_instances: ") + label +
                " instance target is not an item token");
        }
    }
}

}  // namespace

std::vector<TrainingInstance> joint_instances(
    const std::vector<TrainingInstance>& search,
    const std::vector<TrainingInstance>& rec,
    const Vocabulary& vocab,
    const JointOptions& opts) {
    if (opts.search_oversample < 1 || opts.rec_oversample < 1) {
        throw std::invalid_argument("joint_instances: oversample factors must be >= 1");
    }
    validate_against_vocab(search, vocab, "search");
    validate_against_vocab(rec, vocab, "rec");

    std::vector<TrainingInstance> all;
    all.reserve(search.size() * static_cast<std::size_t>(opts.search_oversample) +
                rec.size() * static_cast<std::size_t>(opts.rec_oversample));
    for (int rep = 0; rep < opts.search_oversample; ++rep) {
        all.insert(all.end(), search.begin(), search.end());
    }
    for (int rep = 0; rep < opts.rec_oversample; ++rep) {
        all.insert(all.end(), rec.begin(), rec.end());
    }
    auto rng = make_rng(opts.seed, "joint_shuffle");
    std::shuffle(all.begin(), all.end(), rng);
    return all;
}

std::vector<ItemId> validate_test_coverage(
    const std::vector<TrainingInstance>& train,
    const std::vector<TrainingInstance>& test,
    const Vocabulary& vocab) {
    std::unordered_set<ItemId> seen;
    for (const auto& inst : train) {
        if (auto item = vocab.token_item(inst.target)) seen.insert(*item);
    }
    std::set<ItemId> missing;
    for (const auto& inst : test) {
        if (auto item = vocab.token_item(inst.target)) {
            if (!seen.count(*item)) missing.insert(*item);
        }
    }
    return std::vector<ItemId>(missing.begin(), missing.end());
}

}  // namespace genir
