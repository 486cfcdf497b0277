#include "genir/config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace genir {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& scope) {
    std::vector<std::string> offending;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            offending.push_back(it.key());
        }
    }
    if (!offending.empty()) {
        std::string msg = "unknown config key(s) in " + scope + ":";
        for (const auto& k : offending) msg += " \"" + k + "\"";
        throw std::invalid_argument(msg);
    }
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

AppConfig parse_config(const std::string& text, AppConfig base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
    }
    AppConfig cfg = std::move(base);
    reject_unknown_keys(j, {"retriever", "beam", "sim1", "sim2", "sim3"}, "config root");
    if (j.contains("retriever")) {
        const json& r = j.at("retriever");
        reject_unknown_keys(r,
                            {"embedding_dim", "learning_rate", "weight_decay",
                             "batch_size", "epochs", "tie_output_embeddings", "seed"},
                            "retriever");
        read_key(r, "embedding_dim", cfg.retriever.embedding_dim);
        read_key(r, "learning_rate", cfg.retriever.learning_rate);
        read_key(r, "weight_decay", cfg.retriever.weight_decay);
        read_key(r, "batch_size", cfg.retriever.batch_size);
        read_key(r, "epochs", cfg.retriever.epochs);
        read_key(r, "tie_output_embeddings", cfg.retriever.tie_output_embeddings);
        read_key(r, "seed", cfg.retriever.seed);
    }
    if (j.contains("beam")) {
        const json& b = j.at("beam");
        reject_unknown_keys(b, {"k", "num_groups", "diversity_penalty", "max_depth"},
                            "beam");
        read_key(b, "k", cfg.beam.k);
        read_key(b, "num_groups", cfg.beam.num_groups);
        read_key(b, "diversity_penalty", cfg.beam.diversity_penalty);
        read_key(b, "max_depth", cfg.beam.max_depth);
    }
    if (j.contains("sim1")) {
        const json& s = j.at("sim1");
        reject_unknown_keys(s,
                            {"num_items", "zipf_exponent", "num_users",
                             "interactions_per_user", "num_queries", "shuffle_swaps",
                             "seed"},
                            "sim1");
        read_key(s, "num_items", cfg.sim1.num_items);
        read_key(s, "zipf_exponent", cfg.sim1.zipf_exponent);
        read_key(s, "num_users", cfg.sim1.num_users);
        read_key(s, "interactions_per_user", cfg.sim1.interactions_per_user);
        read_key(s, "num_queries", cfg.sim1.num_queries);
        read_key(s, "shuffle_swaps", cfg.sim1.shuffle_swaps);
        read_key(s, "seed", cfg.sim1.seed);
    }
    if (j.contains("sim2")) {
        const json& s = j.at("sim2");
        reject_unknown_keys(s,
                            {"num_clusters", "items_per_cluster", "num_users",
                             "interactions_per_user", "queries_per_cluster",
                             "query_match_pct", "sample_fraction", "seed"},
                            "sim2");
        read_key(s, "num_clusters", cfg.sim2.num_clusters);
        read_key(s, "items_per_cluster", cfg.sim2.items_per_cluster);
        read_key(s, "num_users", cfg.sim2.num_users);
        read_key(s, "interactions_per_user", cfg.sim2.interactions_per_user);
        read_key(s, "queries_per_cluster", cfg.sim2.queries_per_cluster);
        read_key(s, "query_match_pct", cfg.sim2.query_match_pct);
        read_key(s, "sample_fraction", cfg.sim2.sample_fraction);
        read_key(s, "seed", cfg.sim2.seed);
    }
    if (j.contains("sim3")) {
        const json& s = j.at("sim3");
        reject_unknown_keys(s,
                            {"num_topics", "paraphrases_per_topic",
                             "relevant_items_per_topic", "pairs_in_qrels_pct",
                             "num_users", "interactions_per_user", "seed"},
                            "sim3");
        read_key(s, "num_topics", cfg.sim3.num_topics);
        read_key(s, "paraphrases_per_topic", cfg.sim3.paraphrases_per_topic);
        read_key(s, "relevant_items_per_topic", cfg.sim3.relevant_items_per_topic);
        read_key(s, "pairs_in_qrels_pct", cfg.sim3.pairs_in_qrels_pct);
        read_key(s, "num_users", cfg.sim3.num_users);
        read_key(s, "interactions_per_user", cfg.sim3.interactions_per_user);
        read_key(s, "seed", cfg.sim3.seed);
    }
    cfg.retriever.validate();
    cfg.beam.validate();
    return cfg;
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_config(text, std::move(base));
}

std::string config_to_json(const AppConfig& config) {
    json j;
    j["retriever"] = {{"embedding_dim", config.retriever.embedding_dim},
                      {"learning_rate", config.retriever.learning_rate},
                      {"weight_decay", config.retriever.weight_decay},
                      {"batch_size", config.retriever.batch_size},
                      {"epochs", config.retriever.epochs},
                      {"tie_output_embeddings", config.retriever.tie_output_embeddings},
                      {"seed", config.retriever.seed}};
    j["beam"] = {{"k", config.beam.k},
                 {"num_groups", config.beam.num_groups},
                 {"diversity_penalty", config.beam.diversity_penalty},
                 {"max_depth", config.beam.max_depth}};
    j["sim1"] = {{"num_items", config.sim1.num_items},
                 {"zipf_exponent", config.sim1.zipf_exponent},
                 {"num_users", config.sim1.num_users},
                 {"interactions_per_user", config.sim1.interactions_per_user},
                 {"num_queries", config.sim1.num_queries},
                 {"shuffle_swaps", config.sim1.shuffle_swaps},
                 {"seed", config.sim1.seed}};
    j["sim2"] = {{"num_clusters", config.sim2.num_clusters},
                 {"items_per_cluster", config.sim2.items_per_cluster},
                 {"num_users", config.sim2.num_users},
                 {"interactions_per_user", config.sim2.interactions_per_user},
                 {"queries_per_cluster", config.sim2.queries_per_cluster},
                 {"query_match_pct", config.sim2.query_match_pct},
                 {"sample_fraction", config.sim2.sample_fraction},
                 {"seed", config.sim2.seed}};
    j["sim3"] = {{"num_topics", config.sim3.num_topics},
                 {"paraphrases_per_topic", config.sim3.paraphrases_per_topic},
                 {"relevant_items_per_topic", config.sim3.relevant_items_per_topic},
                 {"pairs_in_qrels_pct", config.sim3.pairs_in_qrels_pct},
                 {"num_users", config.sim3.num_users},
                 {"interactions_per_user", config.sim3.interactions_per_user},
                 {"seed", config.sim3.seed}};
    return j.dump(2);
}

}  // namespace genir
