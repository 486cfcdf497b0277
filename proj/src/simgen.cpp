#include "genir/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "genir/rng.hpp"

namespace genir {

namespace {

// Uniform double in [0,1) from the standardized mt19937_64 stream.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(std::mt19937_64& rng, int n) {
    return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

const std::vector<std::string>& filler_pool() {
    static const std::vector<std::string> pool = {
        "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"};
    return pool;
}

// Unique uninformative query text: the ordinal written in base 8 over the
// filler pool, padded to at least three words.
std::string filler_query_text(long long ordinal) {
    const auto& pool = filler_pool();
    std::vector<int> digits;
    long long v = ordinal;
    while (v > 0) {
        digits.push_back(static_cast<int>(v % 8));
        v /= 8;
    }
    while (digits.size() < 3) digits.push_back(0);
    std::string text;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (!text.empty()) text.push_back(' ');
        text += pool[static_cast<std::size_t>(*it)];
    }
    return text;
}

int rec_train_instance_count(const RecDataset& rec) {
    int count = 0;
    for (const auto& user : rec.users) {
        int t = static_cast<int>(user.interactions.size());
        if (t >= 5) count += t - 4;
    }
    return count;
}

}  // namespace

PopularityDistribution zipf_distribution(int n, double s) {
    if (n < 1) throw std::invalid_argument("zipf_distribution: n must be >= 1");
    if (s < 0.0) throw std::invalid_argument("zipf_distribution: s must be >= 0");
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        weights[static_cast<std::size_t>(i)] = 1.0 / std::pow(static_cast<double>(i + 1), s);
    }
    return normalize_distribution(std::move(weights));
}

PopularityDistribution shuffled_distribution(const PopularityDistribution& base,
                                             int swaps, std::uint64_t seed) {
    if (swaps < 0) throw std::invalid_argument("shuffled_distribution: swaps must be >= 0");
    PopularityDistribution result = base;
    const int n = result.size();
    if (n < 2) return result;
    auto rng = make_rng(seed, "dist_shuffle");
    for (int k = 0; k < swaps; ++k) {
        int i = uniform_int(rng, n);
        int j = uniform_int(rng, n - 1);
        if (j >= i) ++j;  // j != i
        std::swap(result.probs[static_cast<std::size_t>(i)],
                  result.probs[static_cast<std::size_t>(j)]);
    }
    return result;
}

PopularityDistribution mixture_distribution(const PopularityDistribution& p,
                                            const PopularityDistribution& q,
                                            double w) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("mixture_distribution: support mismatch");
    }
    if (w < 0.0 || w > 1.0) {
        throw std::invalid_argument("mixture_distribution: weight outside [0,1]");
    }
    std::vector<double> probs(static_cast<std::size_t>(p.size()));
    for (int i = 0; i < p.size(); ++i) {
        probs[static_cast<std::size_t>(i)] =
            w * p.probs[static_cast<std::size_t>(i)] +
            (1.0 - w) * q.probs[static_cast<std::size_t>(i)];
    }
    return PopularityDistribution{std::move(probs)};
}

std::vector<ItemId> sample_items(const PopularityDistribution& dist, int count,
                                 std::mt19937_64& rng) {
    std::vector<double> cdf(dist.probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.probs.size(); ++i) {
        acc += dist.probs[i];
        cdf[i] = acc;
    }
    std::vector<ItemId> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        double u = uniform01(rng) * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        out.push_back(static_cast<ItemId>(it - cdf.begin()));
    }
    return out;
}

SimOutput generate_sim1(const Sim1Config& cfg) {
    if (cfg.num_items < 2) throw std::invalid_argument("sim1: num_items must be >= 2");
    if (cfg.shuffle_swaps < 0) throw std::invalid_argument("sim1: shuffle_swaps must be >= 0");
    if (cfg.num_users < 1 || cfg.interactions_per_user < 5) {
        throw std::invalid_argument("sim1: need users with at least 5 interactions");
    }

    SimOutput out;
    out.family = "sim1";
    out.seed = cfg.seed;
    out.rec_popularity = zipf_distribution(cfg.num_items, cfg.zipf_exponent);
    out.search_popularity = shuffled_distribution(
        out.rec_popularity, cfg.shuffle_swaps, derive_seed(cfg.seed, "sim1_shuffle"));
    out.achieved_kld = kl_divergence(out.search_popularity, out.rec_popularity);

    // Rec: i.i.d. draws from the base distribution, independent of history.
    out.rec.num_items = cfg.num_items;
    auto rec_rng = make_rng(cfg.seed, "sim1_rec");
    for (int u = 0; u < cfg.num_users; ++u) {
        RecUser user;
        user.user_id = u;
        user.interactions =
            sample_items(out.rec_popularity, cfg.interactions_per_user, rec_rng);
        out.rec.users.push_back(std::move(user));
    }
    out.rec_train_instances = rec_train_instance_count(out.rec);

    // Search: one relevant item per query from the shuffled distribution;
    // query texts enumerate the filler pool so they carry no item signal.
    out.search.num_items = cfg.num_items;
    int train_queries =
        cfg.num_queries > 0 ? cfg.num_queries : out.rec_train_instances;
    int heldout = std::max(10, train_queries / 20);
    auto search_rng = make_rng(cfg.seed, "sim1_search");
    long long ordinal = 0;
    auto emit_queries = [&](int count, Split split) {
        std::vector<ItemId> items = sample_items(out.search_popularity, count, search_rng);
        for (int q = 0; q < count; ++q) {
            out.search.records.push_back(
                {filler_query_text(ordinal++), {items[static_cast<std::size_t>(q)]}, split});
        }
    };
    emit_queries(train_queries, Split::Train);
    emit_queries(heldout, Split::Validation);
    emit_queries(heldout, Split::Test);
    out.search_train_instances = train_queries;
    return out;
}

SimOutput generate_sim2(const Sim2Config& cfg) {
    if (cfg.num_clusters < 1 || cfg.items_per_cluster < 2) {
        throw std::invalid_argument("sim2: need >= 1 cluster with >= 2 items each");
    }
    if (cfg.queries_per_cluster < 1) {
        throw std::invalid_argument("sim2: queries_per_cluster must be >= 1");
    }
    const double supported[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    bool match_ok = false;
    for (double v : supported) match_ok |= (cfg.query_match_pct == v);
    if (!match_ok) {
        throw std::invalid_argument(
            "sim2: query_match_pct must be one of {0, 0.25, 0.5, 0.75, 1}");
    }
    if (cfg.sample_fraction <= 0.0 || cfg.sample_fraction > 1.0) {
        throw std::invalid_argument("sim2: sample_fraction must be in (0, 1]");
    }

    SimOutput out;
    out.family = "sim2";
    out.seed = cfg.seed;
    out.query_match_pct = cfg.query_match_pct;
    out.sample_fraction = cfg.sample_fraction;

    const int num_items = cfg.num_clusters * cfg.items_per_cluster;
    out.cluster_of_item.resize(static_cast<std::size_t>(num_items));
    for (int i = 0; i < num_items; ++i) {
        out.cluster_of_item[static_cast<std::size_t>(i)] = i / cfg.items_per_cluster;
    }

    int interactions = cfg.interactions_per_user;
    if (interactions % 2 != 0) {
        --interactions;
        out.warnings.push_back("sim2: interactions_per_user rounded down to even " +
                               std::to_string(interactions));
    }
    if (interactions < 6) {
        throw std::invalid_argument("sim2: interactions_per_user must be >= 6");
    }

    // Rec: concatenated within-cluster pairs.
    out.rec.num_items = num_items;
    auto rec_rng = make_rng(cfg.seed, "sim2_rec");
    for (int u = 0; u < cfg.num_users; ++u) {
        RecUser user;
        user.user_id = u;
        while (static_cast<int>(user.interactions.size()) < interactions) {
            int first = uniform_int(rec_rng, num_items);
            int cluster = first / cfg.items_per_cluster;
            int offset = uniform_int(rec_rng, cfg.items_per_cluster - 1);
            int second = cluster * cfg.items_per_cluster + offset;
            if (second >= first) ++second;  // same cluster, distinct item
            user.interactions.push_back(first);
            user.interactions.push_back(second);
        }
        out.rec.users.push_back(std::move(user));
    }
    out.rec_train_instances = rec_train_instance_count(out.rec);

    // Search: round-robin item coverage; query choice per assignment.
    out.search.num_items = num_items;
    const int total_queries = cfg.num_clusters * cfg.queries_per_cluster;
    auto query_text = [&](int cluster, int variant) {
        return "q" + std::to_string(cluster) + "v" + std::to_string(variant);
    };
    auto search_rng = make_rng(cfg.seed, "sim2_search");
    const int assignments = out.rec_train_instances;
    for (int a = 0; a < assignments; ++a) {
        ItemId item = a % num_items;
        int cluster = item / cfg.items_per_cluster;
        int query_cluster, variant;
        if (uniform01(search_rng) < cfg.query_match_pct) {
            query_cluster = cluster;
            variant = uniform_int(search_rng, cfg.queries_per_cluster);
        } else {
            int global = uniform_int(search_rng, total_queries);
            query_cluster = global / cfg.queries_per_cluster;
            variant = global % cfg.queries_per_cluster;
        }
        out.search.records.push_back(
            {query_text(query_cluster, variant), {item}, Split::Train});
    }
    out.search_train_instances = assignments;
    return out;
}

namespace {

struct TopicTemplate {
    std::vector<std::string> slot_a;
    std::vector<std::string> slot_b;
};

const std::vector<TopicTemplate>& builtin_templates() {
    // wide synonym banks keep the held-out paraphrase only partially covered
    // by the training paraphrases' words
    static const std::vector<TopicTemplate> bank = {
        {{"relaxing", "calm", "soothing", "peaceful", "gentle"},
         {"piano", "keyboard", "keys", "ivories"}},
        {{"upbeat", "energetic", "lively", "pumping", "intense"},
         {"workout", "exercise", "gym", "training"}},
        {{"classic", "vintage", "retro", "timeless", "golden"},
         {"rock", "guitar", "band", "riffs"}},
        {{"ambient", "atmospheric", "spacey", "ethereal", "drifting"},
         {"focus", "study", "concentration", "deepwork"}},
        {{"smooth", "mellow", "cool", "velvet", "laidback"},
         {"jazz", "sax", "swing", "bebop"}},
        {{"acoustic", "unplugged", "stripped", "bare", "intimate"},
         {"folk", "indie", "songwriter", "campfire"}},
        {{"deep", "driving", "dark", "hypnotic", "pulsing"},
         {"techno", "house", "electronic", "rave"}},
        {{"morning", "sunrise", "early", "dawn", "fresh"},
         {"coffee", "breakfast", "commute", "wakeup"}},
        {{"epic", "cinematic", "orchestral", "sweeping", "heroic"},
         {"soundtrack", "score", "theme", "overture"}},
        {{"happy", "feelgood", "sunny", "cheerful", "bright"},
         {"pop", "dance", "party", "anthems"}},
        {{"romantic", "tender", "heartfelt", "dreamy", "loving"},
         {"ballads", "duets", "serenades", "slowjams"}},
        {{"country", "western", "americana", "rustic", "southern"},
         {"road", "highway", "drive", "backroads"}},
        {{"tropical", "island", "beachy", "coastal", "breezy"},
         {"reggae", "dub", "dancehall", "riddims"}},
        {{"moody", "melancholic", "wistful", "somber", "rainy"},
         {"strings", "cello", "violin", "chamber"}},
        {{"funky", "groovy", "soulful", "brassy", "strutting"},
         {"disco", "funk", "motown", "grooves"}},
        {{"sleepy", "drowsy", "bedtime", "nocturnal", "hushed"},
         {"lullabies", "whitenoise", "drones", "nightsounds"}},
    };
    return bank;
}

const std::vector<std::string>& global_fillers() {
    static const std::vector<std::string> fillers = {"music", "playlist", "best",
                                                     "collection"};
    return fillers;
}

std::vector<std::string> topic_paraphrases(int topic, int count,
                                           std::mt19937_64& rng) {
    const auto& bank = builtin_templates();
    TopicTemplate tmpl;
    if (topic < static_cast<int>(bank.size())) {
        tmpl = bank[static_cast<std::size_t>(topic)];
    } else {
        std::string tag = "zone" + std::to_string(topic);
        tmpl.slot_a = {tag + "a", tag + "b", tag + "c"};
        tmpl.slot_b = {tag + "x", tag + "y", tag + "z"};
    }
    std::set<std::string> seen;
    std::vector<std::string> out;
    while (static_cast<int>(out.size()) < count) {
        std::string words[3] = {
            tmpl.slot_a[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(tmpl.slot_a.size())))],
            tmpl.slot_b[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(tmpl.slot_b.size())))],
            global_fillers()[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(global_fillers().size())))]};
        // token reordering: one of the 6 permutations of the three words
        int perm = uniform_int(rng, 6);
        static const int orders[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                         {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        std::string text = words[orders[perm][0]] + " " + words[orders[perm][1]] +
                           " " + words[orders[perm][2]];
        if (seen.insert(text).second) out.push_back(std::move(text));
    }
    return out;
}

RecDataset sim3_rec_dataset(double theta, int num_topics, int items_per_topic,
                            int num_users, int interactions,
                            std::uint64_t seed) {
    RecDataset rec;
    rec.num_items = num_topics * items_per_topic;
    auto rng = make_rng(seed, "sim3_rec");
    for (int u = 0; u < num_users; ++u) {
        RecUser user;
        user.user_id = u;
        int home = uniform_int(rng, num_topics);
        std::vector<int> others;
        others.reserve(static_cast<std::size_t>(num_topics - 1));
        for (int tpc = 0; tpc < num_topics; ++tpc) {
            if (tpc != home) others.push_back(tpc);
        }
        std::shuffle(others.begin(), others.end(), rng);
        std::size_t cross_cursor = 0;
        for (int i = 0; i < interactions; ++i) {
            int topic;
            if (uniform01(rng) < theta || others.empty()) {
                topic = home;
            } else {
                // cycle distinct foreign topics so cross pairs stay out of qrels
                topic = others[cross_cursor % others.size()];
                ++cross_cursor;
            }
            ItemId item = topic * items_per_topic + uniform_int(rng, items_per_topic);
            user.interactions.push_back(item);
        }
        rec.users.push_back(std::move(user));
    }
    return rec;
}

}  // namespace

double measure_pairs_in_qrels(const RecDataset& rec, const SearchDataset& search) {
    std::unordered_set<std::uint64_t> qrel_pairs;
    auto pair_key = [](ItemId a, ItemId b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    };
    for (const auto& record : search.records) {
        for (std::size_t i = 0; i < record.relevant.size(); ++i) {
            for (std::size_t j = i + 1; j < record.relevant.size(); ++j) {
                qrel_pairs.insert(pair_key(record.relevant[i], record.relevant[j]));
            }
        }
    }
    double fraction_sum = 0.0;
    int contributing_users = 0;
    for (const auto& user : rec.users) {
        std::set<ItemId> distinct(user.interactions.begin(), user.interactions.end());
        std::vector<ItemId> items(distinct.begin(), distinct.end());
        if (items.size() < 2) continue;
        long long total = 0, matched = 0;
        for (std::size_t i = 0; i < items.size(); ++i) {
            for (std::size_t j = i + 1; j < items.size(); ++j) {
                ++total;
                if (qrel_pairs.count(pair_key(items[i], items[j]))) ++matched;
            }
        }
        fraction_sum += static_cast<double>(matched) / static_cast<double>(total);
        ++contributing_users;
    }
    if (contributing_users == 0) return 0.0;
    return 100.0 * fraction_sum / static_cast<double>(contributing_users);
}

SimOutput generate_sim3(const Sim3Config& cfg) {
    if (cfg.num_topics < 2) throw std::invalid_argument("sim3: num_topics must be >= 2");
    if (cfg.relevant_items_per_topic < 2) {
        throw std::invalid_argument(
            "sim3: relevant_items_per_topic must be >= 2 (no within-topic pairs exist)");
    }
    if (cfg.paraphrases_per_topic < 2) {
        throw std::invalid_argument("sim3: need at least a train and a test paraphrase");
    }
    if (cfg.pairs_in_qrels_pct < 0.0 || cfg.pairs_in_qrels_pct > 1.0) {
        throw std::invalid_argument("sim3: pairs_in_qrels_pct must be in [0, 1]");
    }
    if (cfg.interactions_per_user < 5) {
        throw std::invalid_argument("sim3: interactions_per_user must be >= 5");
    }
    if (!cfg.custom_topics.empty() &&
        static_cast<int>(cfg.custom_topics.size()) < cfg.num_topics) {
        throw std::invalid_argument("sim3: custom topics file has fewer topics than requested");
    }

    SimOutput out;
    out.family = "sim3";
    out.seed = cfg.seed;
    out.target_pairs_pct = 100.0 * cfg.pairs_in_qrels_pct;

    const int num_items = cfg.num_topics * cfg.relevant_items_per_topic;
    out.cluster_of_item.resize(static_cast<std::size_t>(num_items));
    for (int i = 0; i < num_items; ++i) {
        out.cluster_of_item[static_cast<std::size_t>(i)] = i / cfg.relevant_items_per_topic;
    }

    // Search: paraphrase queries per topic; the last one is the test query.
    out.search.num_items = num_items;
    auto para_rng = make_rng(cfg.seed, "sim3_paraphrase");
    for (int topic = 0; topic < cfg.num_topics; ++topic) {
        std::vector<std::string> queries;
        if (!cfg.custom_topics.empty()) {
            queries = cfg.custom_topics[static_cast<std::size_t>(topic)];
            if (static_cast<int>(queries.size()) < cfg.paraphrases_per_topic) {
                throw std::invalid_argument("sim3: topic " + std::to_string(topic) +
                                            " has fewer paraphrases than requested");
            }
            queries.resize(static_cast<std::size_t>(cfg.paraphrases_per_topic));
        } else {
            queries = topic_paraphrases(topic, cfg.paraphrases_per_topic, para_rng);
        }
        std::vector<ItemId> relevant;
        for (int r = 0; r < cfg.relevant_items_per_topic; ++r) {
            relevant.push_back(topic * cfg.relevant_items_per_topic + r);
        }
        for (int p = 0; p < cfg.paraphrases_per_topic; ++p) {
            Split split =
                (p == cfg.paraphrases_per_topic - 1) ? Split::Test : Split::Train;
            out.search.records.push_back({queries[static_cast<std::size_t>(p)], relevant, split});
        }
    }
    out.search_train_instances = cfg.num_topics * (cfg.paraphrases_per_topic - 1) *
                                 cfg.relevant_items_per_topic;

    int num_users = cfg.num_users;
    if (num_users <= 0) {
        int per_user = cfg.interactions_per_user - 4;
        num_users = std::max(1, (out.search_train_instances + per_user / 2) / per_user);
    }

    // Rec: bisect the per-draw home-topic probability until the measured
    // pair percentage lands on the target.
    const double target = out.target_pairs_pct;
    double lo = 0.0, hi = 1.0;
    double best_gap = 1e18;
    RecDataset best_rec;
    for (int iter = 0; iter < 40; ++iter) {
        double theta = (iter == 0) ? 1.0 : (iter == 1) ? 0.0 : 0.5 * (lo + hi);
        RecDataset candidate =
            sim3_rec_dataset(theta, cfg.num_topics, cfg.relevant_items_per_topic,
                             num_users, cfg.interactions_per_user, cfg.seed);
        double measured = measure_pairs_in_qrels(candidate, out.search);
        double gap = std::abs(measured - target);
        if (gap < best_gap) {
            best_gap = gap;
            best_rec = std::move(candidate);
            out.achieved_pairs_pct = measured;
        }
        if (best_gap <= 1.0) break;
        if (iter >= 1) {
            if (measured < target) {
                lo = theta;
            } else {
                hi = theta;
            }
        }
    }
    if (best_gap > 5.0) {
        throw std::runtime_error(
            "sim3: could not reach the requested pairs-in-qrels percentage (best " +
            std::to_string(out.achieved_pairs_pct) + " vs target " +
            std::to_string(target) + ")");
    }
    out.rec = std::move(best_rec);
    out.rec_train_instances = rec_train_instance_count(out.rec);
    return out;
}

}  // namespace genir
