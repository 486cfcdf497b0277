#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "genir/rng.hpp"
#include "genir/simgen.hpp"

using namespace genir;

namespace {

// independent reference for measure_pairs_in_qrels: scans record lists per
// pair instead of building a pair index
double pairs_in_qrels_reference(const RecDataset& rec, const SearchDataset& search) {
    double sum = 0.0;
    int users = 0;
    for (const auto& user : rec.users) {
        std::set<ItemId> distinct(user.interactions.begin(), user.interactions.end());
        std::vector<ItemId> items(distinct.begin(), distinct.end());
        if (items.size() < 2) continue;
        int total = 0, hit = 0;
        for (std::size_t i = 0; i < items.size(); ++i) {
            for (std::size_t j = i + 1; j < items.size(); ++j) {
                ++total;
                bool found = false;
                for (const auto& record : search.records) {
                    bool has_a = std::find(record.relevant.begin(), record.relevant.end(),
                                           items[i]) != record.relevant.end();
                    bool has_b = std::find(record.relevant.begin(), record.relevant.end(),
                                           items[j]) != record.relevant.end();
                    if (has_a && has_b) {
                        found = true;
                        break;
                    }
                }
                hit += found ? 1 : 0;
            }
        }
        sum += static_cast<double>(hit) / static_cast<double>(total);
        ++users;
    }
    return users == 0 ? 0.0 : 100.0 * sum / users;
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

std::vector<double> empirical_item_frequency(const std::vector<ItemId>& draws, int n) {
    std::vector<double> freq(static_cast<std::size_t>(n), 0.0);
    for (ItemId i : draws) freq[static_cast<std::size_t>(i)] += 1.0;
    for (double& f : freq) f /= static_cast<double>(draws.size());
    return freq;
}

}  // namespace

TEST_CASE("zipf distribution worked values") {
    auto d = zipf_distribution(4, 1.0);
    CHECK(d.probs[0] == doctest::Approx(0.48).epsilon(1e-12));
    CHECK(d.probs[1] == doctest::Approx(0.24).epsilon(1e-12));
    CHECK(d.probs[2] == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(d.probs[3] == doctest::Approx(0.12).epsilon(1e-12));

    auto uniform = zipf_distribution(3, 0.0);
    for (double p : uniform.probs) CHECK(p == doctest::Approx(1.0 / 3.0));

    CHECK(zipf_distribution(1, 2.5).probs == std::vector<double>{1.0});
    CHECK_THROWS_AS(zipf_distribution(0, 1.0), std::invalid_argument);

    double total = 0.0;
    for (double p : zipf_distribution(100, 1.3).probs) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shuffled distribution applies transpositions") {
    auto base = zipf_distribution(4, 1.0);
    auto same = shuffled_distribution(base, 0, 5);
    CHECK(same.probs == base.probs);
    CHECK(kl_divergence(same, base) == doctest::Approx(0.0));

    // one transposition changes exactly two positions, values swapped
    auto one = shuffled_distribution(base, 1, 5);
    std::vector<int> changed;
    for (int i = 0; i < 4; ++i) {
        if (one.probs[static_cast<std::size_t>(i)] != base.probs[static_cast<std::size_t>(i)]) {
            changed.push_back(i);
        }
    }
    REQUIRE(changed.size() == 2);
    CHECK(one.probs[static_cast<std::size_t>(changed[0])] ==
          base.probs[static_cast<std::size_t>(changed[1])]);
    CHECK(one.probs[static_cast<std::size_t>(changed[1])] ==
          base.probs[static_cast<std::size_t>(changed[0])]);

    // a shuffle is always a permutation of the original weights
    auto many = shuffled_distribution(base, 17, 6);
    auto sorted_base = base.probs;
    auto sorted_many = many.probs;
    std::sort(sorted_base.begin(), sorted_base.end());
    std::sort(sorted_many.begin(), sorted_many.end());
    CHECK(sorted_base == sorted_many);
}

TEST_CASE("median kld grows with swap count") {
    auto base = zipf_distribution(20, 1.0);
    std::vector<int> swap_levels = {0, 1, 2, 4, 8};
    std::vector<double> medians;
    for (int swaps : swap_levels) {
        std::vector<double> klds;
        for (std::uint64_t seed = 0; seed < 31; ++seed) {
            klds.push_back(kl_divergence(shuffled_distribution(base, swaps, seed), base));
        }
        std::sort(klds.begin(), klds.end());
        medians.push_back(klds[klds.size() / 2]);
    }
    for (std::size_t i = 1; i < medians.size(); ++i) {
        CHECK(medians[i] >= medians[i - 1] - 1e-12);
    }
}

TEST_CASE("mixture reproduces the motivational exposure example") {
    // averaging {20%, 0%, 50%, 10%} and {5%, 40%, 50%, 5%} gives the
    // joint-training exposure {12.5%, 20%, 50%, 7.5%}
    PopularityDistribution rec{{0.20, 0.00, 0.50, 0.10}};
    PopularityDistribution search{{0.05, 0.40, 0.50, 0.05}};
    auto mixed = mixture_distribution(rec, search, 0.5);
    std::vector<double> expected = {0.125, 0.20, 0.50, 0.075};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(mixed.probs[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("empirical joint exposure matches the averaged distributions") {
    // equal-sized draws from two distributions mix their popularity
    PopularityDistribution a{{0.20, 0.00, 0.50, 0.30}};
    PopularityDistribution b{{0.05, 0.40, 0.50, 0.05}};
    auto rng = make_rng(2024, "exposure");
    auto draws_a = sample_items(a, 50000, rng);
    auto draws_b = sample_items(b, 50000, rng);
    draws_a.insert(draws_a.end(), draws_b.begin(), draws_b.end());
    auto freq = empirical_item_frequency(draws_a, 4);
    auto expected = mixture_distribution(a, b, 0.5);
    CHECK(l1_distance(freq, expected.probs) < 0.02);
}

TEST_CASE("sampling converges to the base distribution") {
    auto dist = zipf_distribution(10, 1.0);
    auto rng = make_rng(7, "sampling");
    auto draws = sample_items(dist, 100000, rng);
    CHECK(l1_distance(empirical_item_frequency(draws, 10), dist.probs) < 0.05);
}

TEST_CASE("sim1 output structure and divergence") {
    Sim1Config cfg;
    cfg.num_users = 50;
    cfg.seed = 3;

    cfg.shuffle_swaps = 0;
    auto zero = generate_sim1(cfg);
    CHECK(zero.achieved_kld == doctest::Approx(0.0));
    CHECK(zero.rec_train_instances == 50 * (cfg.interactions_per_user - 4));
    // instance parity within 5%
    double ratio = static_cast<double>(zero.search_train_instances) /
                   static_cast<double>(zero.rec_train_instances);
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));

    cfg.shuffle_swaps = 8;
    auto shuffled = generate_sim1(cfg);
    CHECK(shuffled.achieved_kld > 0.0);
    // rec side identical for the same seed regardless of the swap level
    CHECK(shuffled.rec == zero.rec);

    // determinism: bit-identical datasets per seed
    auto again = generate_sim1(cfg);
    CHECK(again.rec == shuffled.rec);
    CHECK(again.search == shuffled.search);

    cfg.seed = 4;
    auto other = generate_sim1(cfg);
    CHECK_FALSE(other.rec == shuffled.rec);
}

TEST_CASE("sim1 queries recycle a small filler pool") {
    Sim1Config cfg;
    cfg.num_users = 40;
    auto sim = generate_sim1(cfg);
    std::set<std::string> words;
    for (const auto& r : sim.search.records) {
        for (const auto& w : tokenize_words(r.query)) words.insert(w);
    }
    CHECK(words.size() <= 8);
    for (const auto& r : sim.search.records) CHECK(r.relevant.size() == 1);
}

TEST_CASE("sim1 empirical frequencies follow the governing distributions") {
    Sim1Config cfg;
    cfg.num_users = 400;
    cfg.interactions_per_user = 24;
    cfg.shuffle_swaps = 6;
    cfg.seed = 11;
    auto sim = generate_sim1(cfg);

    std::vector<ItemId> rec_draws;
    for (const auto& u : sim.rec.users) {
        rec_draws.insert(rec_draws.end(), u.interactions.begin(), u.interactions.end());
    }
    CHECK(l1_distance(empirical_item_frequency(rec_draws, cfg.num_items),
                      sim.rec_popularity.probs) < 0.05);

    std::vector<ItemId> search_draws;
    for (const auto& r : sim.search.records) search_draws.push_back(r.relevant[0]);
    CHECK(l1_distance(empirical_item_frequency(search_draws, cfg.num_items),
                      sim.search_popularity.probs) < 0.05);
}

TEST_CASE("sim2 cluster structure") {
    Sim2Config cfg;
    cfg.num_users = 80;
    cfg.seed = 5;
    cfg.query_match_pct = 1.0;
    auto sim = generate_sim2(cfg);
    CHECK(sim.rec.num_items == 30);  // defaults give 30 items

    // every adjacent pair lies in one cluster
    for (const auto& user : sim.rec.users) {
        REQUIRE(user.interactions.size() % 2 == 0);
        for (std::size_t i = 0; i + 1 < user.interactions.size(); i += 2) {
            CHECK(sim.cluster_of_item[static_cast<std::size_t>(user.interactions[i])] ==
                  sim.cluster_of_item[static_cast<std::size_t>(user.interactions[i + 1])]);
            CHECK(user.interactions[i] != user.interactions[i + 1]);
        }
    }

    // at 100% match every query's relevance stays within one cluster
    std::map<std::string, std::set<int>> clusters_of_query;
    for (const auto& r : sim.search.records) {
        for (ItemId item : r.relevant) {
            clusters_of_query[r.query].insert(
                sim.cluster_of_item[static_cast<std::size_t>(item)]);
        }
    }
    for (const auto& [text, clusters] : clusters_of_query) CHECK(clusters.size() == 1);
}

TEST_CASE("sim2 at full match has exactly one component per cluster") {
    Sim2Config cfg;
    cfg.num_users = 100;
    cfg.query_match_pct = 1.0;
    cfg.seed = 9;
    auto sim = generate_sim2(cfg);

    // union-find over items, joined through query texts
    std::vector<int> parent(static_cast<std::size_t>(sim.rec.num_items));
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    std::map<std::string, ItemId> first_item;
    for (const auto& r : sim.search.records) {
        for (ItemId item : r.relevant) {
            auto [it, inserted] = first_item.emplace(r.query, item);
            if (!inserted) {
                parent[static_cast<std::size_t>(find(item))] = find(it->second);
            }
        }
    }
    std::set<int> roots;
    for (int i = 0; i < sim.rec.num_items; ++i) roots.insert(find(i));
    CHECK(static_cast<int>(roots.size()) == cfg.num_clusters);
}

TEST_CASE("sim2 at zero match spreads queries across clusters") {
    // statistical check over several seeds
    int spanning_majority = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Sim2Config cfg;
        cfg.num_users = 100;
        cfg.query_match_pct = 0.0;
        cfg.seed = seed;
        auto sim = generate_sim2(cfg);
        std::map<std::string, std::set<int>> clusters_of_query;
        for (const auto& r : sim.search.records) {
            for (ItemId item : r.relevant) {
                clusters_of_query[r.query].insert(
                    sim.cluster_of_item[static_cast<std::size_t>(item)]);
            }
        }
        int spanning = 0;
        for (const auto& [text, clusters] : clusters_of_query) {
            spanning += clusters.size() >= 2 ? 1 : 0;
        }
        if (spanning * 2 > static_cast<int>(clusters_of_query.size())) ++spanning_majority;
    }
    CHECK(spanning_majority >= 4);
}

TEST_CASE("sim2 rejects unsupported match levels and odd interactions round down") {
    Sim2Config cfg;
    cfg.query_match_pct = 0.3;
    CHECK_THROWS_AS(generate_sim2(cfg), std::invalid_argument);

    Sim2Config odd;
    odd.num_users = 10;
    odd.interactions_per_user = 9;
    auto sim = generate_sim2(odd);
    CHECK(sim.rec.users[0].interactions.size() == 8);
    CHECK(!sim.warnings.empty());
}

TEST_CASE("sim3 paraphrase split and relevance shape") {
    Sim3Config cfg;
    cfg.seed = 21;
    auto sim = generate_sim3(cfg);
    std::map<int, int> train_queries, test_queries;
    std::map<std::string, int> topic_of_query;
    for (const auto& r : sim.search.records) {
        CHECK(static_cast<int>(r.relevant.size()) == cfg.relevant_items_per_topic);
        int topic = sim.cluster_of_item[static_cast<std::size_t>(r.relevant[0])];
        for (ItemId item : r.relevant) {
            CHECK(sim.cluster_of_item[static_cast<std::size_t>(item)] == topic);
        }
        if (r.split == Split::Train) ++train_queries[topic];
        if (r.split == Split::Test) ++test_queries[topic];
    }
    for (int t = 0; t < cfg.num_topics; ++t) {
        CHECK(train_queries[t] == 4);  // four train paraphrases
        CHECK(test_queries[t] == 1);   // one held-out test paraphrase
    }
}

TEST_CASE("sim3 reaches the requested pair percentage within five points") {
    for (double target : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        Sim3Config cfg;
        cfg.pairs_in_qrels_pct = target;
        cfg.seed = 33;
        auto sim = generate_sim3(cfg);
        double measured = measure_pairs_in_qrels(sim.rec, sim.search);
        CHECK(std::abs(measured - 100.0 * target) <= 5.0);
        CHECK(sim.achieved_pairs_pct == doctest::Approx(measured));
    }
}

TEST_CASE("sim3 validates its configuration") {
    Sim3Config bad;
    bad.relevant_items_per_topic = 1;
    CHECK_THROWS_AS(generate_sim3(bad), std::invalid_argument);
}

TEST_CASE("sim3 is deterministic per seed") {
    Sim3Config cfg;
    cfg.seed = 77;
    cfg.pairs_in_qrels_pct = 0.5;
    auto a = generate_sim3(cfg);
    auto b = generate_sim3(cfg);
    CHECK(a.rec == b.rec);
    CHECK(a.search == b.search);
}

TEST_CASE("sim2 and sim3 keep instance counts comparable") {
    Sim2Config cfg2;
    cfg2.num_users = 120;
    auto sim2 = generate_sim2(cfg2);
    CHECK(std::abs(sim2.search_train_instances - sim2.rec_train_instances) <=
          0.05 * sim2.rec_train_instances);

    Sim3Config cfg3;
    auto sim3 = generate_sim3(cfg3);
    CHECK(std::abs(sim3.search_train_instances - sim3.rec_train_instances) <=
          0.05 * std::max(sim3.rec_train_instances, sim3.search_train_instances));
}

TEST_CASE("measure pairs in qrels worked example") {
    RecDataset rec;
    rec.num_items = 4;
    rec.users.push_back({0, {1, 2, 3}});
    SearchDataset search;
    search.num_items = 4;
    search.records.push_back({"q", {2, 3}, Split::Train});
    CHECK(measure_pairs_in_qrels(rec, search) == doctest::Approx(100.0 / 3.0).epsilon(1e-9));

    // every query relevant to the whole catalog: all pairs covered
    SearchDataset full;
    full.num_items = 4;
    full.records.push_back({"all", {0, 1, 2, 3}, Split::Train});
    CHECK(measure_pairs_in_qrels(rec, full) == doctest::Approx(100.0));

    // no search data at all
    SearchDataset empty;
    empty.num_items = 4;
    CHECK(measure_pairs_in_qrels(rec, empty) == doctest::Approx(0.0));

    // users with fewer than two distinct items contribute nothing
    RecDataset tiny;
    tiny.num_items = 4;
    tiny.users.push_back({0, {2, 2, 2}});
    CHECK(measure_pairs_in_qrels(tiny, full) == doctest::Approx(0.0));
}

TEST_CASE("measure pairs in qrels matches the brute-force reference") {
    auto rng = make_rng(55, "pairs_ref");
    for (int it = 0; it < 25; ++it) {
        int n = 6 + static_cast<int>(rng() % 10);
        RecDataset rec;
        rec.num_items = n;
        for (int u = 0; u < 8; ++u) {
            RecUser user;
            user.user_id = u;
            int len = 2 + static_cast<int>(rng() % 6);
            for (int i = 0; i < len; ++i) {
                user.interactions.push_back(static_cast<ItemId>(rng() % n));
            }
            rec.users.push_back(std::move(user));
        }
        SearchDataset search;
        search.num_items = n;
        int queries = 1 + static_cast<int>(rng() % 5);
        for (int q = 0; q < queries; ++q) {
            std::set<ItemId> rel;
            int size = 1 + static_cast<int>(rng() % 4);
            while (static_cast<int>(rel.size()) < size) {
                rel.insert(static_cast<ItemId>(rng() % n));
            }
            search.records.push_back({"q" + std::to_string(q),
                                      std::vector<ItemId>(rel.begin(), rel.end()),
                                      Split::Train});
        }
        CHECK(measure_pairs_in_qrels(rec, search) ==
              doctest::Approx(pairs_in_qrels_reference(rec, search)).epsilon(1e-9));
    }
}
