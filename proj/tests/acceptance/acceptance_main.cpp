// Acceptance suite: runs every gate end-to-end and prints one line per
// criterion. Exits nonzero if any criterion fails. The first argument is the
// path to the genir CLI binary (used by the determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "genir/corpus.hpp"
#include "genir/decode.hpp"
#include "genir/evalkit.hpp"
#include "genir/hypolab.hpp"
#include "genir/io.hpp"
#include "genir/retriever.hpp"
#include "genir/rng.hpp"
#include "genir/simgen.hpp"
#include "genir/statmetrics.hpp"

using namespace genir;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kBaseSeed = 42;

int failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("CRITERION %2d %-28s %s  (%s)\n", number, name.c_str(),
                pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++failures;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: SIM1 divergence trend
// ---------------------------------------------------------------------------

void criterion_1() {
    auto start = std::chrono::steady_clock::now();
    Sim1ExperimentSpec spec;
    spec.base.seed = kBaseSeed;  // 20 items, 250 users x 24 = 5k instances/task
    spec.swap_levels = {0, 1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64};
    spec.num_seeds = 5;
    spec.recall_k = 10;
    spec.retriever.embedding_dim = 8;
    spec.retriever.weight_decay = 5.0;
    auto result = run_sim1_experiment(spec);

    std::vector<double> kld, joint;
    double joint_at_zero = 0.0, specific_at_zero = 0.0;
    for (const auto& cell : result.cells) {
        if (cell.model == "gen_rs") {
            kld.push_back(cell.level_detail);
            joint.push_back(cell.mean_recall);
            if (cell.level == 0.0) joint_at_zero = cell.mean_recall;
        } else if (cell.level == 0.0) {
            specific_at_zero = cell.mean_recall;
        }
    }
    double rho = spearman_correlation(kld, joint);
    double seconds = elapsed_seconds(start);
    bool pass = joint_at_zero >= specific_at_zero - 0.02 && rho < 0.0 && seconds < 300.0;
    report(1, "sim1 divergence trend", pass,
           "joint@0=" + fmt(joint_at_zero) + " specific@0=" + fmt(specific_at_zero) +
               " spearman=" + fmt(rho, 3) + " " + fmt(seconds, 1) + "s");
}

// ---------------------------------------------------------------------------
// criterion 2: SIM2 S->R significance
// ---------------------------------------------------------------------------

struct LevelStats {
    double joint_mean = 0.0, specific_mean = 0.0, p_value = 1.0;
};

void criterion_2() {
    auto start = std::chrono::steady_clock::now();
    Sim2ExperimentSpec spec;
    spec.base.num_users = 600;
    spec.base.seed = kBaseSeed;
    spec.match_levels = {0.0, 1.0};
    spec.sample_fractions = {0.65};
    spec.num_seeds = 5;
    spec.recall_k = 10;
    spec.retriever.epochs = 8;
    auto result = run_sim2_experiment(spec);

    std::map<double, LevelStats> levels;
    for (const auto& cell : result.cells) {
        auto& stats = levels[cell.level];
        if (cell.model == "gen_rs") {
            stats.joint_mean = cell.mean_recall;
            stats.p_value = cell.p_value_vs_specific.value_or(1.0);
        } else {
            stats.specific_mean = cell.mean_recall;
        }
    }
    const auto& high = levels[1.0];
    const auto& low = levels[0.0];
    bool high_ok = high.joint_mean > high.specific_mean && high.p_value < 0.05;
    bool low_ok = !(low.joint_mean > low.specific_mean && low.p_value < 0.05);
    double seconds = elapsed_seconds(start);
    bool pass = high_ok && low_ok && seconds < 180.0;
    report(2, "sim2 S->R regularization", pass,
           "match1: " + fmt(high.joint_mean) + ">" + fmt(high.specific_mean) + " p=" +
               fmt(high.p_value) + "; match0: " + fmt(low.joint_mean) + " vs " +
               fmt(low.specific_mean) + " p=" + fmt(low.p_value) + " " + fmt(seconds, 1) +
               "s");
}

// ---------------------------------------------------------------------------
// criterion 3: SIM3 R->S significance
// ---------------------------------------------------------------------------

void criterion_3() {
    auto start = std::chrono::steady_clock::now();
    Sim3ExperimentSpec spec;
    spec.base.num_topics = 16;
    spec.base.seed = kBaseSeed;
    spec.pair_levels = {0.0, 1.0};
    spec.num_seeds = 5;
    spec.recall_k = 10;
    spec.retriever.epochs = 15;
    auto result = run_sim3_experiment(spec);

    std::map<double, LevelStats> levels;
    for (const auto& cell : result.cells) {
        auto& stats = levels[cell.level];
        if (cell.model == "gen_rs") {
            stats.joint_mean = cell.mean_recall;
            stats.p_value = cell.p_value_vs_specific.value_or(1.0);
        } else {
            stats.specific_mean = cell.mean_recall;
        }
    }
    const auto& high = levels[1.0];
    const auto& low = levels[0.0];
    bool high_ok = high.joint_mean > high.specific_mean && high.p_value < 0.05;
    bool low_ok = low.joint_mean <= low.specific_mean;
    double seconds = elapsed_seconds(start);
    bool pass = high_ok && low_ok && seconds < 180.0;
    report(3, "sim3 R->S regularization", pass,
           "pairs1: " + fmt(high.joint_mean) + ">" + fmt(high.specific_mean) + " p=" +
               fmt(high.p_value) + "; pairs0: " + fmt(low.joint_mean) + "<=" +
               fmt(low.specific_mean) + " " + fmt(seconds, 1) + "s");
}

// ---------------------------------------------------------------------------
// criterion 4: metric oracles
// ---------------------------------------------------------------------------

double kld_naive(const PopularityDistribution& p, const PopularityDistribution& q) {
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        double pi = p.probs[static_cast<std::size_t>(i)];
        if (pi > 0.0) s += pi * std::log(pi / q.probs[static_cast<std::size_t>(i)]);
    }
    return s;
}

double ks_naive(const PopularityDistribution& p, const PopularityDistribution& q) {
    double best = 0.0, cp = 0.0, cq = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        cp += p.probs[static_cast<std::size_t>(i)];
        cq += q.probs[static_cast<std::size_t>(i)];
        if (std::abs(cp - cq) > best) best = std::abs(cp - cq);
    }
    return best;
}

double gini_naive(const std::vector<double>& x) {
    double num = 0.0, sum = 0.0;
    for (double a : x) {
        sum += a;
        for (double b : x) num += std::abs(a - b);
    }
    return num / (2.0 * static_cast<double>(x.size()) * sum);
}

double recall_naive(const RankedList& list, const std::vector<ItemId>& rel, int k) {
    std::set<ItemId> relevant(rel.begin(), rel.end());
    int hits = 0;
    for (int i = 0; i < std::min<int>(k, static_cast<int>(list.entries.size())); ++i) {
        if (relevant.count(list.entries[static_cast<std::size_t>(i)].item)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double pairs_naive(const RecDataset& rec, const SearchDataset& search) {
    double sum = 0.0;
    int users = 0;
    for (const auto& user : rec.users) {
        std::set<ItemId> items(user.interactions.begin(), user.interactions.end());
        std::vector<ItemId> v(items.begin(), items.end());
        if (v.size() < 2) continue;
        int total = 0, hit = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = i + 1; j < v.size(); ++j) {
                ++total;
                bool found = false;
                for (const auto& r : search.records) {
                    bool a = std::count(r.relevant.begin(), r.relevant.end(), v[i]) > 0;
                    bool b = std::count(r.relevant.begin(), r.relevant.end(), v[j]) > 0;
                    if (a && b) {
                        found = true;
                        break;
                    }
                }
                hit += found ? 1 : 0;
            }
        }
        sum += static_cast<double>(hit) / total;
        ++users;
    }
    return users ? 100.0 * sum / users : 0.0;
}

PopularityDistribution random_dist(std::mt19937_64& rng, int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (double& x : w) x = 0.02 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return normalize_distribution(std::move(w));
}

void criterion_4() {
    auto rng = make_rng(kBaseSeed, "oracles");
    double worst = 0.0;
    int cases = 0;

    for (int it = 0; it < 120; ++it) {
        int n = 2 + static_cast<int>(rng() % 40);
        auto p = random_dist(rng, n);
        auto q = random_dist(rng, n);
        worst = std::max(worst, std::abs(kl_divergence(p, q) - kld_naive(p, q)));
        worst = std::max(worst, std::abs(ks_distance(p, q) - ks_naive(p, q)));
        std::vector<double> counts(static_cast<std::size_t>(n));
        for (double& c : counts) c = static_cast<double>(rng() % 30);
        counts[0] += 1.0;
        worst = std::max(worst, std::abs(gini_index(counts) - gini_naive(counts)));

        RankedList list;
        list.k = 10;
        std::set<ItemId> used;
        while (static_cast<int>(used.size()) < std::min(10, n)) {
            used.insert(static_cast<ItemId>(rng() % n));
        }
        double score = 0.0;
        for (ItemId item : used) list.entries.push_back({item, score -= 0.1});
        std::vector<ItemId> rel;
        for (int r = 0; r < 3; ++r) rel.push_back(static_cast<ItemId>(rng() % n));
        std::sort(rel.begin(), rel.end());
        rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
        int k = 1 + static_cast<int>(rng() % 10);
        worst = std::max(worst, std::abs(recall_at_k(list, rel, k) - recall_naive(list, rel, k)));
        ++cases;
    }

    // pairs-in-qrels + the analysis metrics on random micro-datasets
    for (int it = 0; it < 100; ++it) {
        int n = 5 + static_cast<int>(rng() % 8);
        RecDataset rec;
        rec.num_items = n;
        for (int u = 0; u < 6; ++u) {
            RecUser user;
            user.user_id = u;
            int len = 2 + static_cast<int>(rng() % 5);
            for (int i = 0; i < len; ++i) {
                user.interactions.push_back(static_cast<ItemId>(rng() % n));
            }
            rec.users.push_back(std::move(user));
        }
        SearchDataset search;
        search.num_items = n;
        int queries = 1 + static_cast<int>(rng() % 4);
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
        worst = std::max(worst, std::abs(measure_pairs_in_qrels(rec, search) -
                                         pairs_naive(rec, search)));
        ++cases;
    }

    // randomized match/co-occurrence cases vs independent scans
    for (int it = 0; it < 20; ++it) {
        int n = 8 + static_cast<int>(rng() % 43);
        SearchDataset train;
        train.num_items = n;
        int queries = 2 + static_cast<int>(rng() % 19);
        for (int q = 0; q < queries; ++q) {
            std::set<ItemId> rel;
            int size = 1 + static_cast<int>(rng() % 5);
            while (static_cast<int>(rel.size()) < size) {
                rel.insert(static_cast<ItemId>(rng() % n));
            }
            train.records.push_back({"q" + std::to_string(q),
                                     std::vector<ItemId>(rel.begin(), rel.end()),
                                     Split::Train});
        }
        // merged qrels view for the reference scan
        std::map<std::string, std::set<ItemId>> by_text;
        for (const auto& record : train.records) {
            by_text[record.query].insert(record.relevant.begin(), record.relevant.end());
        }
        std::vector<RecTestCase> match_cases;
        std::vector<RunEntry> base_runs, joint_runs;
        for (int c = 0; c < 6; ++c) {
            RecTestCase t;
            t.id = "rec_" + std::to_string(c);
            int hist = 1 + static_cast<int>(rng() % 5);
            for (int h = 0; h < hist; ++h) t.history.push_back(static_cast<ItemId>(rng() % n));
            t.target = static_cast<ItemId>(rng() % n);
            RankedList lb, lj;
            lb.entries = {{static_cast<ItemId>(rng() % n), -0.5}};
            lj.entries = {{static_cast<ItemId>(rng() % n), -0.5}};
            base_runs.push_back({t.id, lb});
            joint_runs.push_back({t.id, lj});
            match_cases.push_back(std::move(t));
        }
        auto contrast =
            history_target_query_matches(match_cases, train, base_runs, joint_runs);
        double expected = 0.0;
        for (const auto& t : match_cases) {
            std::set<ItemId> distinct(t.history.begin(), t.history.end());
            for (ItemId h : distinct) {
                if (h == t.target) continue;
                for (const auto& [text, items] : by_text) {
                    if (items.count(h) && items.count(t.target)) expected += 1.0;
                }
            }
            ++cases;
        }
        expected /= static_cast<double>(match_cases.size());
        worst = std::max(worst, std::abs(contrast.overall_mean - expected));
    }

    for (int it = 0; it < 20; ++it) {
        int n = 8 + static_cast<int>(rng() % 20);
        RecDataset rec;
        rec.num_items = n;
        for (int u = 0; u < 10; ++u) {
            RecUser user;
            user.user_id = u;
            int len = 4 + static_cast<int>(rng() % 6);
            for (int i = 0; i < len; ++i) {
                user.interactions.push_back(static_cast<ItemId>(rng() % n));
            }
            rec.users.push_back(std::move(user));
        }
        std::vector<SearchTestCase> cooc_cases;
        std::vector<RunEntry> base_runs, joint_runs;
        for (int c = 0; c < 6; ++c) {
            SearchTestCase t;
            t.id = "search_" + std::to_string(c);
            std::set<ItemId> rel;
            while (rel.size() < 3) rel.insert(static_cast<ItemId>(rng() % n));
            t.relevance.assign(rel.begin(), rel.end());
            RankedList lb, lj;
            lb.entries = {{static_cast<ItemId>(rng() % n), -0.5}};
            lj.entries = {{static_cast<ItemId>(rng() % n), -0.5}};
            base_runs.push_back({t.id, lb});
            joint_runs.push_back({t.id, lj});
            cooc_cases.push_back(std::move(t));
        }
        auto contrast = rel_pair_cooccurrence(cooc_cases, rec, base_runs, joint_runs);
        double expected = 0.0;
        for (const auto& t : cooc_cases) {
            double sum = 0.0;
            int pairs_n = 0;
            for (std::size_t i = 0; i < t.relevance.size(); ++i) {
                for (std::size_t j = i + 1; j < t.relevance.size(); ++j) {
                    int count = 0;
                    for (const auto& user : rec.users) {
                        std::size_t limit = user.interactions.size() - 2;
                        bool has_a = false, has_b = false;
                        for (std::size_t p = 0; p < limit; ++p) {
                            has_a |= user.interactions[p] == t.relevance[i];
                            has_b |= user.interactions[p] == t.relevance[j];
                        }
                        count += (has_a && has_b) ? 1 : 0;
                    }
                    sum += count;
                    ++pairs_n;
                }
            }
            expected += sum / pairs_n;
            ++cases;
        }
        expected /= static_cast<double>(cooc_cases.size());
        worst = std::max(worst, std::abs(contrast.overall_mean - expected));
    }

    // hand-worked reference values
    RecDataset worked_rec;
    worked_rec.num_items = 4;
    worked_rec.users.push_back({0, {1, 2, 3}});
    SearchDataset worked_search;
    worked_search.num_items = 4;
    worked_search.records.push_back({"q", {2, 3}, Split::Train});
    bool pairs_ok =
        std::abs(measure_pairs_in_qrels(worked_rec, worked_search) - 100.0 / 3.0) < 1e-9;

    // query-match worked value: 2 + 3 unique queries -> 5
    SearchDataset match_train;
    match_train.num_items = 6;
    match_train.records.push_back({"qa", {1, 3}, Split::Train});
    match_train.records.push_back({"qb", {1, 3, 5}, Split::Train});
    match_train.records.push_back({"qc", {2, 3}, Split::Train});
    match_train.records.push_back({"qd", {2, 3, 4}, Split::Train});
    match_train.records.push_back({"qe", {2, 3, 0}, Split::Train});
    RecTestCase worked_case;
    worked_case.id = "rec_0";
    worked_case.history = {1, 2};
    worked_case.target = 3;
    RankedList differs_a, differs_b;
    differs_a.entries = {{0, -0.1}};
    differs_b.entries = {{3, -0.1}};
    auto contrast = history_target_query_matches(
        {worked_case}, match_train, {{"rec_0", differs_a}}, {{"rec_0", differs_b}});
    bool match_ok = contrast.differing_mean && std::abs(*contrast.differing_mean - 5.0) < 1e-9;

    // co-occurrence worked value: (3+4+2)/3 = 3.0
    RecDataset cooc_rec;
    cooc_rec.num_items = 8;
    int uid = 0;
    auto add_users = [&](ItemId a, ItemId b, int count) {
        for (int i = 0; i < count; ++i) cooc_rec.users.push_back({uid++, {a, b, 7, 7}});
    };
    add_users(1, 3, 3);
    add_users(1, 5, 4);
    add_users(3, 5, 2);
    SearchTestCase cooc_case;
    cooc_case.id = "search_0";
    cooc_case.relevance = {1, 3, 5};
    auto cooc = rel_pair_cooccurrence({cooc_case}, cooc_rec, {{"search_0", differs_a}},
                                      {{"search_0", differs_b}});
    bool cooc_ok = cooc.differing_mean && std::abs(*cooc.differing_mean - 3.0) < 1e-9;

    bool pass = worst < 1e-9 && pairs_ok && match_ok && cooc_ok;
    report(4, "metric oracles", pass,
           "max|err|=" + fmt(worst, 12) + " over " + std::to_string(cases) +
               " cases; worked values " +
               ((pairs_ok && match_ok && cooc_ok) ? "exact" : "WRONG"));
}

// ---------------------------------------------------------------------------
// criterion 5: gradient check
// ---------------------------------------------------------------------------

void criterion_5() {
    auto rng = make_rng(kBaseSeed, "acceptance_grad");
    double worst = 0.0;
    int cases = 0;
    for (int it = 0; it < 24; ++it) {
        bool tied = it % 2 == 0;
        int num_items = 3 + static_cast<int>(rng() % 5);
        int dim = 3 + static_cast<int>(rng() % 5);
        SearchDataset search;
        search.num_items = num_items;
        search.records.push_back({"alpha beta gamma delta", {0}, Split::Train});
        RecDataset rec;
        rec.num_items = num_items;
        Vocabulary vocab = build_vocabulary(search, rec);

        RetrieverConfig cfg;
        cfg.embedding_dim = dim;
        cfg.tie_output_embeddings = tied;
        cfg.seed = rng();
        RetrieverParams params = init_params(cfg, vocab);
        auto brng = make_rng(rng(), "bias");
        std::normal_distribution<double> normal(0.0, 0.4);
        for (double& b : params.item_bias) b = normal(brng);

        std::vector<TrainingInstance> batch;
        int batch_size = 1 + static_cast<int>(rng() % 6);
        for (int b = 0; b < batch_size; ++b) {
            TrainingInstance inst;
            int len = 1 + static_cast<int>(rng() % 4);
            for (int i = 0; i < len; ++i) {
                inst.input.push_back(static_cast<TokenIndex>(rng() % vocab.size()));
            }
            inst.target = vocab.item_token(static_cast<ItemId>(rng() % num_items));
            batch.push_back(std::move(inst));
        }

        ParamGradient grad(params);
        loss_and_gradient(params, batch, grad);
        const double h = 1e-3;
        auto loss_at = [&]() {
            double loss = 0.0;
            for (const auto& inst : batch) {
                auto probs = forward(params, inst.input);
                loss -= std::log(
                    probs[static_cast<std::size_t>(inst.target - params.item_token_offset)]);
            }
            return loss / static_cast<double>(batch.size());
        };
        auto probe = [&](std::vector<double>& values, const std::vector<double>& analytic) {
            for (std::size_t i = 0; i < values.size(); ++i) {
                double saved = values[i];
                values[i] = saved + h;
                double up = loss_at();
                values[i] = saved - h;
                double down = loss_at();
                values[i] = saved;
                double numeric = (up - down) / (2.0 * h);
                double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
                worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
            }
        };
        probe(params.input_embeddings, grad.input_embeddings);
        if (!tied) probe(params.output_embeddings, grad.output_embeddings);
        probe(params.item_bias, grad.item_bias);
        ++cases;
    }
    report(5, "analytic gradients", worst < 1e-4,
           "max relative error " + fmt(worst, 8) + " over " + std::to_string(cases) +
               " cases (tied and untied)");
}

// ---------------------------------------------------------------------------
// criterion 6: decoding equivalence
// ---------------------------------------------------------------------------

class AcceptanceScorer final : public NextTokenScorer {
public:
    AcceptanceScorer(int vocab, int depth, std::uint64_t seed)
        : vocab_(vocab), depth_(depth), seed_(seed) {}
    int token_count() const override { return vocab_; }
    bool is_terminal(std::span<const TokenIndex> prefix) const override {
        return static_cast<int>(prefix.size()) == depth_;
    }
    void next_scores(std::span<const TokenIndex> prefix, std::vector<double>& log_scores,
                     std::vector<char>& valid) const override {
        for (int t = 0; t < vocab_; ++t) {
            std::uint64_t h = seed_;
            for (TokenIndex p : prefix) h = splitmix64(h ^ static_cast<std::uint64_t>(p + 3));
            h = splitmix64(h ^ static_cast<std::uint64_t>(t + 11) ^
                           (static_cast<std::uint64_t>(prefix.size()) << 32));
            log_scores[static_cast<std::size_t>(t)] =
                -0.02 - 5.0 * (static_cast<double>(h >> 11) * 0x1.0p-53);
            valid[static_cast<std::size_t>(t)] = (splitmix64(h ^ 0x77ULL) % 4 != 0) ? 1 : 0;
        }
        valid[0] = 1;  // always at least one continuation
    }
    std::optional<ItemId> sequence_item(std::span<const TokenIndex> seq) const override {
        return static_cast<ItemId>(seq.back());
    }

    RankedList enumerate_top_k(int k) const {
        std::vector<std::pair<std::vector<TokenIndex>, double>> frontier = {{{}, 0.0}};
        std::vector<double> scores(static_cast<std::size_t>(vocab_));
        std::vector<char> valid(static_cast<std::size_t>(vocab_));
        for (int step = 0; step < depth_; ++step) {
            std::vector<std::pair<std::vector<TokenIndex>, double>> next;
            for (auto& [prefix, score] : frontier) {
                next_scores(prefix, scores, valid);
                for (int t = 0; t < vocab_; ++t) {
                    if (!valid[static_cast<std::size_t>(t)]) continue;
                    auto extended = prefix;
                    extended.push_back(t);
                    next.emplace_back(std::move(extended),
                                      score + scores[static_cast<std::size_t>(t)]);
                }
            }
            frontier = std::move(next);
        }
        std::map<ItemId, double> best;
        for (auto& [seq, score] : frontier) {
            auto [it, inserted] = best.emplace(*sequence_item(seq), score);
            if (!inserted && score > it->second) it->second = score;
        }
        std::vector<RankedEntry> entries;
        for (auto& [item, score] : best) entries.push_back({item, score});
        std::sort(entries.begin(), entries.end(),
                  [](const RankedEntry& a, const RankedEntry& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.item < b.item;
                  });
        if (static_cast<int>(entries.size()) > k) entries.resize(static_cast<std::size_t>(k));
        RankedList list;
        list.k = k;
        list.entries = std::move(entries);
        return list;
    }

private:
    int vocab_;
    int depth_;
    std::uint64_t seed_;
};

void criterion_6() {
    auto rng = make_rng(kBaseSeed, "acceptance_beam");
    int mismatches = 0;
    for (int it = 0; it < 50; ++it) {
        int vocab = 3 + static_cast<int>(rng() % 10);
        int depth = 1 + static_cast<int>(rng() % 3);
        AcceptanceScorer scorer(vocab, depth, rng());
        int k = 1 + static_cast<int>(rng() % 6);
        BeamConfig cfg;
        cfg.k = k;
        cfg.num_groups = 1;
        cfg.diversity_penalty = 0.0;
        cfg.max_depth = depth;
        auto got = diverse_beam_search(scorer, cfg);
        auto expected = scorer.enumerate_top_k(k);
        bool equal = got.entries.size() == expected.entries.size();
        for (std::size_t i = 0; equal && i < got.entries.size(); ++i) {
            equal = got.entries[i].item == expected.entries[i].item &&
                    std::abs(got.entries[i].score - expected.entries[i].score) < 1e-12;
        }
        if (!equal) ++mismatches;
    }

    // depth-1 diversified decoding vs top_k
    int depth1_mismatches = 0;
    for (int it = 0; it < 30; ++it) {
        int n = 4 + static_cast<int>(rng() % 9);
        std::vector<double> probs(static_cast<std::size_t>(n));
        double sum = 0.0;
        for (double& p : probs) {
            p = 0.01 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
            sum += p;
        }
        for (double& p : probs) p /= sum;

        struct Depth1 final : NextTokenScorer {
            std::vector<double> probs;
            int token_count() const override { return static_cast<int>(probs.size()); }
            bool is_terminal(std::span<const TokenIndex> prefix) const override {
                return prefix.size() == 1;
            }
            void next_scores(std::span<const TokenIndex>, std::vector<double>& log_scores,
                             std::vector<char>& valid) const override {
                for (std::size_t i = 0; i < probs.size(); ++i) {
                    log_scores[i] = std::log(probs[i]);
                    valid[i] = 1;
                }
            }
            std::optional<ItemId> sequence_item(std::span<const TokenIndex> seq) const override {
                return static_cast<ItemId>(seq[0]);
            }
        } scorer;
        scorer.probs = probs;

        BeamConfig cfg;
        cfg.k = 1 + static_cast<int>(rng() % n);
        cfg.num_groups = 0;
        cfg.diversity_penalty = 0.25;
        cfg.max_depth = 1;
        auto got = diverse_beam_search(scorer, cfg);
        auto expected = top_k(probs, cfg.k);
        bool equal = got.entries.size() == expected.entries.size();
        for (std::size_t i = 0; equal && i < got.entries.size(); ++i) {
            equal = got.entries[i].item == expected.entries[i].item;
        }
        if (!equal) ++depth1_mismatches;
    }
    bool pass = mismatches == 0 && depth1_mismatches == 0;
    report(6, "decoding equivalence", pass,
           std::to_string(mismatches) + "/50 enumeration mismatches, " +
               std::to_string(depth1_mismatches) + "/30 depth-1 mismatches");
}

// ---------------------------------------------------------------------------
// criterion 7: t-test reference values
// ---------------------------------------------------------------------------

void criterion_7() {
    std::vector<double> zero = {0, 0, 0, 0, 0};
    std::vector<double> diffs = {1, 2, 3, 4, 5};
    auto result = paired_t_test(diffs, zero);
    bool t_ok = std::abs(result.t_statistic - 4.2426) < 1e-3;
    bool p_ok = std::abs(result.p_value - 0.0132) < 1e-3;
    auto same = paired_t_test(diffs, diffs);
    bool same_ok = same.p_value == 1.0;
    report(7, "paired t-test", t_ok && p_ok && same_ok,
           "t=" + fmt(result.t_statistic) + " p=" + fmt(result.p_value, 5) +
               " identical-vectors p=" + fmt(same.p_value, 3));
}

// ---------------------------------------------------------------------------
// criterion 8: embedding regularization margins
// ---------------------------------------------------------------------------

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

double cluster_margin(const RetrieverParams& params, const std::vector<int>& cluster) {
    double within = 0.0, across = 0.0;
    int within_n = 0, across_n = 0;
    for (ItemId i = 0; i < params.num_items; ++i) {
        auto ei = item_embedding(params, i);
        for (ItemId j = i + 1; j < params.num_items; ++j) {
            auto ej = item_embedding(params, j);
            double c = cosine(ei, ej);
            if (cluster[static_cast<std::size_t>(i)] == cluster[static_cast<std::size_t>(j)]) {
                within += c;
                ++within_n;
            } else {
                across += c;
                ++across_n;
            }
        }
    }
    return within / within_n - across / across_n;
}

void criterion_8() {
    Sim2Config data_cfg;
    data_cfg.num_users = 600;
    data_cfg.query_match_pct = 1.0;
    RetrieverConfig model_cfg;
    model_cfg.epochs = 8;

    int joint_positive = 0;
    double joint_margin_sum = 0.0, rec_margin_sum = 0.0;
    auto seeds = experiment_seeds(kBaseSeed, 5);
    for (std::uint64_t seed : seeds) {
        data_cfg.seed = seed;
        auto sim = generate_sim2(data_cfg);
        ModelSelection selection;
        selection.gen_r = true;
        selection.gen_rs = true;
        auto models = train_models(sim, model_cfg, seed, selection, 1.0, Task::Rec);
        double joint_margin = cluster_margin(models.gen_rs->params, sim.cluster_of_item);
        double rec_margin = cluster_margin(models.gen_r->params, sim.cluster_of_item);
        joint_margin_sum += joint_margin;
        rec_margin_sum += rec_margin;
        if (joint_margin > 0.0) ++joint_positive;
    }
    bool pass = joint_positive >= 4 && joint_margin_sum > rec_margin_sum;
    report(8, "embedding regularization", pass,
           "joint margin>0 in " + std::to_string(joint_positive) +
               "/5 seeds; mean joint=" + fmt(joint_margin_sum / 5.0) +
               " rec-only=" + fmt(rec_margin_sum / 5.0));
}

// ---------------------------------------------------------------------------
// criterion 9: CLI determinism
// ---------------------------------------------------------------------------

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) { return read_file(a) == read_file(b); }

void criterion_9(const std::string& cli) {
    fs::path work = fs::temp_directory_path() / "genir_acceptance_determinism";
    fs::remove_all(work);
    fs::create_directories(work);
    auto shell = [&](const std::string& command) {
        std::string full = command + " > /dev/null 2>&1";
        return std::system(full.c_str()) == 0;
    };
    bool ran = true;
    for (int run = 1; run <= 2; ++run) {
        std::string dir = (work / ("run" + std::to_string(run))).string();
        ran = ran && shell(cli + " simulate sim2 --users 80 --seed 7 -o " + dir + "/data");
        ran = ran && shell(cli + " train joint --data " + dir + "/data --seed 3 --epochs 3 -o " +
                           dir + "/models");
        ran = ran && shell(cli + " experiment sim2 --levels 1.0 --seeds 2 --seed 5 -o " + dir +
                           "/exp");
    }
    bool pass = ran;
    std::vector<std::string> compared;
    if (ran) {
        const char* files[] = {"data/rec.jsonl", "data/search.jsonl", "data/catalog.json",
                               "data/meta.json", "models/model_joint.ckpt",
                               "models/train_report_joint.json", "exp/table3_sim2.csv"};
        for (const char* f : files) {
            bool equal = same_bytes(work / "run1" / f, work / "run2" / f);
            pass = pass && equal;
            if (!equal) compared.push_back(f);
        }
    }
    report(9, "seeded determinism", pass,
           ran ? (pass ? "simulate/train/experiment byte-identical across reruns"
                       : "differs: " + compared.front())
               : "CLI invocation failed");
    fs::remove_all(work);
}

// ---------------------------------------------------------------------------
// criterion 10: popularity-cap ablation
// ---------------------------------------------------------------------------

void criterion_10() {
    CapAblationSpec spec;
    spec.family = CapFamily::Sim2;
    spec.sim2.num_users = 600;
    spec.sim2.query_match_pct = 1.0;
    spec.sim2.seed = kBaseSeed;
    spec.caps = {0, -1};
    spec.num_seeds = 5;
    spec.recall_k = 10;
    spec.retriever.epochs = 8;
    auto result = run_cap_ablation(spec);

    double anchor = 0.0, cap_zero = 0.0, uncapped = 0.0;
    for (const auto& cell : result.cells) {
        if (cell.model != "gen_rs") anchor = cell.mean_recall;
        else if (cell.level == 0.0) cap_zero = cell.mean_recall;
        else if (cell.level == -1.0) uncapped = cell.mean_recall;
    }

    // unrestricted joint training through the ordinary path, same seeds
    SimOutput sim = generate_sim2(spec.sim2);
    auto seeds = experiment_seeds(spec.sim2.seed, spec.num_seeds);
    double direct = 0.0;
    for (std::uint64_t seed : seeds) {
        ModelSelection selection;
        selection.gen_rs = true;
        auto models = train_models(sim, spec.retriever, seed, selection, 1.0, Task::Rec);
        auto cases = rec_eval_cases(sim.rec, models.vocab, Split::Test, models.rec_train);
        std::vector<EvalInstance> instances;
        for (const auto& c : cases) {
            instances.push_back({c.id, Task::Rec, {c.target},
                                 retrieve(models.gen_rs->params, c.input, spec.recall_k)});
        }
        direct += evaluate(instances, spec.recall_k).mean_recall;
    }
    direct /= static_cast<double>(seeds.size());

    bool zero_ok = std::abs(cap_zero - anchor) <= 0.02;
    bool uncapped_ok = uncapped == direct;  // exact
    report(10, "popularity-cap ablation", zero_ok && uncapped_ok,
           "cap0=" + fmt(cap_zero) + " vs task-specific " + fmt(anchor) + "; uncapped " +
               (uncapped_ok ? "matches joint exactly" : "DIFFERS from joint"));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance_suite <path-to-genir-cli>\n";
        return 2;
    }
    std::printf("acceptance suite (base seed %llu)\n",
                static_cast<unsigned long long>(kBaseSeed));
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9(argv[1]);
    criterion_10();
    if (failures == 0) {
        std::printf("all 10 criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
}
