#pragma once
// Simulated dataset families. Each generator is deterministic per seed and
// emits a rec/search dataset pair with comparable training-instance counts,
// plus the metadata (achieved divergences, cluster labels) the experiment
// runners report.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "genir/corpus.hpp"
#include "genir/statmetrics.hpp"

namespace genir {

struct Sim1Config {
    int num_items = 20;
    double zipf_exponent = 1.0;
    int num_users = 250;
    int interactions_per_user = 24;
    int num_queries = 0;  // 0 = match the rec training-instance count
    int shuffle_swaps = 0;
    std::uint64_t seed = 0;
};

struct Sim2Config {
    int num_clusters = 5;
    int items_per_cluster = 6;
    int num_users = 300;
    int interactions_per_user = 8;
    int queries_per_cluster = 4;
    double query_match_pct = 1.0;  // one of {0, 0.25, 0.5, 0.75, 1}
    double sample_fraction = 1.0;  // target-task train instances retained
    std::uint64_t seed = 0;
};

struct Sim3Config {
    int num_topics = 10;
    int paraphrases_per_topic = 5;
    int relevant_items_per_topic = 5;
    double pairs_in_qrels_pct = 1.0;  // in [0, 1]
    int num_users = 0;  // 0 = derive so instance counts match search
    int interactions_per_user = 10;
    std::uint64_t seed = 0;
    // Optional externally supplied topics (paraphrase lists); when empty the
    // built-in template bank is used.
    std::vector<std::vector<std::string>> custom_topics;
};

struct SimOutput {
    RecDataset rec;
    SearchDataset search;

    std::string family;  // "sim1" | "sim2" | "sim3"
    std::uint64_t seed = 0;
    int rec_train_instances = 0;
    int search_train_instances = 0;
    std::vector<std::string> warnings;

    // sim1: the two governing distributions and their divergence
    PopularityDistribution rec_popularity;
    PopularityDistribution search_popularity;
    double achieved_kld = 0.0;

    // sim2/sim3: per-item cluster (topic) label
    std::vector<int> cluster_of_item;
    double query_match_pct = -1.0;
    double sample_fraction = 1.0;

    // sim3: pair co-occurrence alignment
    double target_pairs_pct = -1.0;    // percent, 0..100
    double achieved_pairs_pct = -1.0;  // percent, 0..100
};

// probs[i] proportional to 1/(i+1)^s, normalized.
PopularityDistribution zipf_distribution(int n, double s);

// Applies `swaps` uniformly random transpositions (i != j) to the vector.
PopularityDistribution shuffled_distribution(const PopularityDistribution& base,
                                             int swaps, std::uint64_t seed);

// Convex combination w*p + (1-w)*q, the effective exposure of joint training
// over two equally sized datasets at w = 0.5.
PopularityDistribution mixture_distribution(const PopularityDistribution& p,
                                            const PopularityDistribution& q,
                                            double w = 0.5);

// Draws `count` items from the distribution (inverse-CDF on mt19937_64).
std::vector<ItemId> sample_items(const PopularityDistribution& dist, int count,
                                 std::mt19937_64& rng);

// Popularity-only signal: rec targets i.i.d. from the base Zipf law, search
// relevance from an incrementally shuffled copy, query texts from a fixed
// pool of eight filler words.
SimOutput generate_sim1(const Sim1Config& cfg);

// Cluster co-occurrence signal: user histories are within-cluster pairs;
// each (item, query) assignment draws from the item's cluster query pool
// with probability query_match_pct, else from the global pool.
SimOutput generate_sim2(const Sim2Config& cfg);

// Topic paraphrase signal: one held-out test paraphrase per topic; rec
// sequences calibrated so the measured in-qrels pair percentage lands
// within 5 points of the target.
SimOutput generate_sim3(const Sim3Config& cfg);

// Over all users: fraction of unordered distinct-item pairs from the user's
// interactions that co-occur in at least one query's relevance set, averaged
// over users that contribute at least one pair. Returns a percentage.
double measure_pairs_in_qrels(const RecDataset& rec, const SearchDataset& search);

}  // namespace genir
