#include "genir/hypolab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "genir/rng.hpp"

namespace genir {

namespace {

std::uint64_t pair_key(ItemId a, ItemId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

// qrels view of a search split: query text -> union of its relevance sets
std::map<std::string, std::set<ItemId>> qrels_by_text(const SearchDataset& data,
                                                      Split split) {
    std::map<std::string, std::set<ItemId>> merged;
    for (const auto& record : data.records) {
        if (record.split != split) continue;
        auto& set = merged[record.query];
        set.insert(record.relevant.begin(), record.relevant.end());
    }
    return merged;
}

std::vector<ItemId> run_items(const RankedList& list) {
    std::vector<ItemId> items;
    items.reserve(list.entries.size());
    for (const auto& e : list.entries) items.push_back(e.item);
    return items;
}

}  // namespace

std::vector<std::uint64_t> experiment_seeds(std::uint64_t base_seed, int count) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        seeds.push_back(derive_seed(base_seed, "run_seed_" + std::to_string(i)));
    }
    return seeds;
}

std::vector<TrainingInstance> subsample_fraction(
    const std::vector<TrainingInstance>& instances, double fraction,
    std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0) {
        throw std::invalid_argument("subsample_fraction: fraction must be in (0, 1]");
    }
    if (fraction == 1.0) return instances;
    std::size_t keep = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(instances.size())));
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed, "subsample");
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(keep);
    std::sort(order.begin(), order.end());  // keep original relative order
    std::vector<TrainingInstance> out;
    out.reserve(keep);
    for (std::size_t idx : order) out.push_back(instances[idx]);
    return out;
}

std::vector<TrainingInstance> cap_per_item(const std::vector<TrainingInstance>& instances,
                                           int cap, const Vocabulary& vocab) {
    if (cap < 0) return instances;
    std::unordered_map<TokenIndex, int> taken;
    std::vector<TrainingInstance> out;
    for (const auto& inst : instances) {
        if (!vocab.is_item_token(inst.target)) {
            throw std::invalid_argument("cap_per_item: target is not an item token");
        }
        if (taken[inst.target] < cap) {
            ++taken[inst.target];
            out.push_back(inst);
        }
    }
    return out;
}

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("spearman_correlation: need two equally sized vectors");
    }
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank on ties
            for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
            i = j + 1;
        }
        return r;
    };
    std::vector<double> rx = ranks(x), ry = ranks(y);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx <= 0.0 || dy <= 0.0) return 0.0;
    return num / std::sqrt(dx * dy);
}

TrainedModels train_models(const SimOutput& sim, const RetrieverConfig& base_config,
                           std::uint64_t seed, const ModelSelection& selection,
                           double target_sample_fraction, Task target_task,
                           int added_task_cap) {
    TrainedModels models;
    models.vocab = build_vocabulary(sim.search, sim.rec);
    models.search_train = search_instances(sim.search, models.vocab, Split::Train);
    models.rec_splits = rec_split(sim.rec, models.vocab);
    models.rec_train = models.rec_splits.train;

    if (target_sample_fraction < 1.0) {
        auto& target_instances =
            (target_task == Task::Rec) ? models.rec_train : models.search_train;
        target_instances = subsample_fraction(target_instances, target_sample_fraction,
                                              derive_seed(seed, "sample_fraction"));
    }

    RetrieverConfig config = base_config;
    config.seed = seed;
    if (selection.gen_s) {
        models.gen_s = train(config, models.search_train, models.vocab);
    }
    if (selection.gen_r) {
        models.gen_r = train(config, models.rec_train, models.vocab);
    }
    if (selection.gen_rs) {
        std::vector<TrainingInstance> added =
            (target_task == Task::Rec) ? models.search_train : models.rec_train;
        added = cap_per_item(added, added_task_cap, models.vocab);
        const auto& target_instances =
            (target_task == Task::Rec) ? models.rec_train : models.search_train;
        JointOptions opts;
        opts.seed = seed;
        std::vector<TrainingInstance> joint =
            (target_task == Task::Rec)
                ? joint_instances(added, target_instances, models.vocab, opts)
                : joint_instances(target_instances, added, models.vocab, opts);
        models.gen_rs = train(config, joint, models.vocab);
    }
    return models;
}

std::vector<RecTestCase> rec_eval_cases(const RecDataset& rec, const Vocabulary& vocab,
                                        Split split,
                                        const std::vector<TrainingInstance>& target_train) {
    if (split != Split::Test && split != Split::Validation) {
        throw std::invalid_argument("rec_eval_cases: split must be test or validation");
    }
    std::unordered_set<TokenIndex> trained_targets;
    for (const auto& inst : target_train) trained_targets.insert(inst.target);

    RecSplitResult splits = rec_split(rec, vocab);
    const auto& instances = (split == Split::Test) ? splits.test : splits.validation;
    const auto& user_of = (split == Split::Test) ? splits.test_user : splits.validation_user;

    std::vector<RecTestCase> cases;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& inst = instances[i];
        if (!trained_targets.count(inst.target)) continue;  // unseen target item
        const RecUser& user = rec.users[static_cast<std::size_t>(user_of[i])];
        RecTestCase test_case;
        test_case.id = "rec_" + std::to_string(user.user_id);
        test_case.input = inst.input;
        for (TokenIndex token : inst.input) {
            test_case.history.push_back(*vocab.token_item(token));
        }
        test_case.target = *vocab.token_item(inst.target);
        cases.push_back(std::move(test_case));
    }
    return cases;
}

std::vector<SearchTestCase> search_eval_cases(const SearchDataset& search,
                                              const Vocabulary& vocab, Split split) {
    std::vector<SearchTestCase> cases;
    int index = 0;
    for (const auto& record : search.records) {
        if (record.split != split) continue;
        SearchTestCase test_case;
        test_case.id = "search_" + std::to_string(index++);
        test_case.relevance = record.relevant;
        test_case.input = vocab.tokenize(record.query);
        if (test_case.input.empty()) continue;  // nothing to condition on
        cases.push_back(std::move(test_case));
    }
    return cases;
}

namespace {

EvalReport evaluate_rec(const RetrieverParams& params,
                        const std::vector<RecTestCase>& cases, int k) {
    std::vector<EvalInstance> instances;
    instances.reserve(cases.size());
    for (const auto& c : cases) {
        EvalInstance inst;
        inst.id = c.id;
        inst.task = Task::Rec;
        inst.relevance = {c.target};
        inst.prediction = retrieve(params, c.input, k);
        instances.push_back(std::move(inst));
    }
    return evaluate(instances, k);
}

EvalReport evaluate_search(const RetrieverParams& params,
                           const std::vector<SearchTestCase>& cases, int k) {
    std::vector<EvalInstance> instances;
    instances.reserve(cases.size());
    for (const auto& c : cases) {
        EvalInstance inst;
        inst.id = c.id;
        inst.task = Task::Search;
        inst.relevance = c.relevance;
        inst.prediction = retrieve(params, c.input, k);
        instances.push_back(std::move(inst));
    }
    return evaluate(instances, k);
}

struct ModelSeries {
    std::vector<double> per_seed_means;

    double mean() const {
        return std::accumulate(per_seed_means.begin(), per_seed_means.end(), 0.0) /
               static_cast<double>(per_seed_means.size());
    }
    double stddev() const {
        if (per_seed_means.size() < 2) return 0.0;
        double m = mean(), ss = 0.0;
        for (double v : per_seed_means) ss += (v - m) * (v - m);
        return std::sqrt(ss / static_cast<double>(per_seed_means.size() - 1));
    }
};

}  // namespace

SweepResult run_sim1_experiment(const Sim1ExperimentSpec& spec) {
    if (spec.swap_levels.empty()) throw std::invalid_argument("sim1 experiment: no levels");
    if (spec.num_seeds < 1) throw std::invalid_argument("sim1 experiment: need seeds");
    SweepResult result;
    auto seeds = experiment_seeds(spec.base.seed, spec.num_seeds);

    for (int level : spec.swap_levels) {
        ModelSeries joint_series, specific_series;
        double kld_sum = 0.0;
        for (std::uint64_t seed : seeds) {
            // data varies per seed: each seed is an independent replicate of
            // the whole level, shuffle path included
            Sim1Config cfg = spec.base;
            cfg.shuffle_swaps = level;
            cfg.seed = seed;
            SimOutput sim = generate_sim1(cfg);
            kld_sum += sim.achieved_kld;

            ModelSelection selection;
            selection.gen_r = true;
            selection.gen_rs = true;
            TrainedModels models =
                train_models(sim, spec.retriever, seed, selection, 1.0, Task::Rec);
            auto cases = rec_eval_cases(sim.rec, models.vocab, Split::Test, models.rec_train);
            specific_series.per_seed_means.push_back(
                evaluate_rec(models.gen_r->params, cases, spec.recall_k).mean_recall);
            joint_series.per_seed_means.push_back(
                evaluate_rec(models.gen_rs->params, cases, spec.recall_k).mean_recall);
        }
        double mean_kld = kld_sum / static_cast<double>(seeds.size());
        std::optional<double> p_value;
        if (seeds.size() >= 2) {
            p_value = paired_t_test(joint_series.per_seed_means,
                                    specific_series.per_seed_means).p_value;
        }
        result.cells.push_back({static_cast<double>(level), "gen_r",
                                specific_series.mean(), specific_series.stddev(),
                                std::nullopt, mean_kld});
        result.cells.push_back({static_cast<double>(level), "gen_rs",
                                joint_series.mean(), joint_series.stddev(),
                                p_value, mean_kld});
    }
    return result;
}

SweepResult run_sim2_experiment(const Sim2ExperimentSpec& spec) {
    if (spec.match_levels.empty()) throw std::invalid_argument("sim2 experiment: no levels");
    if (spec.sample_fractions.empty()) {
        throw std::invalid_argument("sim2 experiment: no sample fractions");
    }
    if (spec.num_seeds < 1) throw std::invalid_argument("sim2 experiment: need seeds");
    SweepResult result;
    auto seeds = experiment_seeds(spec.base.seed, spec.num_seeds);

    for (double sample : spec.sample_fractions) {
        for (double level : spec.match_levels) {
            ModelSeries joint_series, specific_series;
            for (std::uint64_t seed : seeds) {
                Sim2Config cfg = spec.base;
                cfg.query_match_pct = level;
                cfg.sample_fraction = sample;
                cfg.seed = seed;
                SimOutput sim = generate_sim2(cfg);

                ModelSelection selection;
                selection.gen_r = true;
                selection.gen_rs = true;
                TrainedModels models = train_models(sim, spec.retriever, seed,
                                                    selection, sample, Task::Rec);
                auto cases = rec_eval_cases(sim.rec, models.vocab, Split::Test, models.rec_train);
                specific_series.per_seed_means.push_back(
                    evaluate_rec(models.gen_r->params, cases, spec.recall_k).mean_recall);
                joint_series.per_seed_means.push_back(
                    evaluate_rec(models.gen_rs->params, cases, spec.recall_k).mean_recall);
            }
            std::optional<double> p_value;
            if (seeds.size() >= 2) {
                p_value = paired_t_test(joint_series.per_seed_means,
                                        specific_series.per_seed_means).p_value;
            }
            result.cells.push_back({level, "gen_r", specific_series.mean(),
                                    specific_series.stddev(), std::nullopt, sample});
            result.cells.push_back({level, "gen_rs", joint_series.mean(),
                                    joint_series.stddev(), p_value, sample});
        }
    }
    return result;
}

SweepResult run_sim3_experiment(const Sim3ExperimentSpec& spec) {
    if (spec.pair_levels.empty()) throw std::invalid_argument("sim3 experiment: no levels");
    if (spec.num_seeds < 1) throw std::invalid_argument("sim3 experiment: need seeds");
    SweepResult result;
    auto seeds = experiment_seeds(spec.base.seed, spec.num_seeds);

    for (double level : spec.pair_levels) {
        ModelSeries joint_series, specific_series;
        double achieved_sum = 0.0;
        for (std::uint64_t seed : seeds) {
            Sim3Config cfg = spec.base;
            cfg.pairs_in_qrels_pct = level;
            cfg.seed = seed;
            SimOutput sim = generate_sim3(cfg);
            achieved_sum += sim.achieved_pairs_pct;

            ModelSelection selection;
            selection.gen_s = true;
            selection.gen_rs = true;
            TrainedModels models =
                train_models(sim, spec.retriever, seed, selection, 1.0, Task::Search);
            auto cases = search_eval_cases(sim.search, models.vocab, Split::Test);
            specific_series.per_seed_means.push_back(
                evaluate_search(models.gen_s->params, cases, spec.recall_k).mean_recall);
            joint_series.per_seed_means.push_back(
                evaluate_search(models.gen_rs->params, cases, spec.recall_k).mean_recall);
        }
        double mean_achieved = achieved_sum / static_cast<double>(seeds.size());
        std::optional<double> p_value;
        if (seeds.size() >= 2) {
            p_value = paired_t_test(joint_series.per_seed_means,
                                    specific_series.per_seed_means).p_value;
        }
        result.cells.push_back({level, "gen_s", specific_series.mean(),
                                specific_series.stddev(), std::nullopt, mean_achieved});
        result.cells.push_back({level, "gen_rs", joint_series.mean(),
                                joint_series.stddev(), p_value, mean_achieved});
    }
    return result;
}

SweepResult run_cap_ablation(const CapAblationSpec& spec) {
    if (spec.caps.empty()) throw std::invalid_argument("cap ablation: no cap levels");
    if (spec.num_seeds < 1) throw std::invalid_argument("cap ablation: need seeds");
    SweepResult result;
    const Task target = (spec.family == CapFamily::Sim2) ? Task::Rec : Task::Search;
    SimOutput sim = (spec.family == CapFamily::Sim2)
                        ? generate_sim2(spec.sim2)
                        : generate_sim3(spec.sim3);
    auto seeds = experiment_seeds(
        spec.family == CapFamily::Sim2 ? spec.sim2.seed : spec.sim3.seed, spec.num_seeds);

    // Task-specific anchor per seed.
    ModelSeries anchor_series;
    for (std::uint64_t seed : seeds) {
        ModelSelection selection;
        selection.gen_r = (target == Task::Rec);
        selection.gen_s = (target == Task::Search);
        selection.gen_rs = false;
        TrainedModels models = train_models(sim, spec.retriever, seed, selection, 1.0, target);
        double mean = (target == Task::Rec)
                          ? evaluate_rec(models.gen_r->params, rec_eval_cases(sim.rec, models.vocab, Split::Test, models.rec_train),
                                         spec.recall_k).mean_recall
                          : evaluate_search(models.gen_s->params,
                                            search_eval_cases(sim.search, models.vocab, Split::Test), spec.recall_k)
                                .mean_recall;
        anchor_series.per_seed_means.push_back(mean);
    }
    result.cells.push_back({-2.0, target == Task::Rec ? "gen_r" : "gen_s",
                            anchor_series.mean(), anchor_series.stddev(), std::nullopt,
                            0.0});

    for (int cap : spec.caps) {
        ModelSeries joint_series;
        double added_kept = 0.0;
        for (std::uint64_t seed : seeds) {
            ModelSelection selection;
            selection.gen_rs = true;
            TrainedModels models =
                train_models(sim, spec.retriever, seed, selection, 1.0, target, cap);
            const auto& added =
                (target == Task::Rec) ? models.search_train : models.rec_train;
            added_kept = static_cast<double>(
                cap_per_item(added, cap, models.vocab).size());
            double mean = (target == Task::Rec)
                              ? evaluate_rec(models.gen_rs->params,
                                             rec_eval_cases(sim.rec, models.vocab, Split::Test, models.rec_train), spec.recall_k)
                                    .mean_recall
                              : evaluate_search(models.gen_rs->params,
                                                search_eval_cases(sim.search, models.vocab, Split::Test),
                                                spec.recall_k)
                                    .mean_recall;
            joint_series.per_seed_means.push_back(mean);
        }
        result.cells.push_back({static_cast<double>(cap), "gen_rs", joint_series.mean(),
                                joint_series.stddev(), std::nullopt, added_kept});
    }
    return result;
}

namespace {

// Aligns two runs over identical id sets; returns parallel indices.
std::vector<std::pair<const RunEntry*, const RunEntry*>> align_runs(
    const std::vector<RunEntry>& baseline, const std::vector<RunEntry>& joint) {
    if (baseline.size() != joint.size()) {
        throw std::invalid_argument("runs cover different numbers of instances");
    }
    std::unordered_map<std::string, const RunEntry*> joint_by_id;
    for (const auto& entry : joint) joint_by_id[entry.query_id] = &entry;
    std::vector<std::pair<const RunEntry*, const RunEntry*>> pairs;
    pairs.reserve(baseline.size());
    for (const auto& entry : baseline) {
        auto it = joint_by_id.find(entry.query_id);
        if (it == joint_by_id.end()) {
            throw std::invalid_argument("runs cover different instance ids: " +
                                        entry.query_id);
        }
        pairs.emplace_back(&entry, it->second);
    }
    return pairs;
}

SubsetContrast contrast_from_values(
    const std::vector<std::pair<bool, double>>& flagged_values) {
    SubsetContrast contrast;
    double all_sum = 0.0, diff_sum = 0.0, agree_sum = 0.0;
    int diff_n = 0, agree_n = 0;
    for (const auto& [differs, value] : flagged_values) {
        all_sum += value;
        if (differs) {
            diff_sum += value;
            ++diff_n;
        } else {
            agree_sum += value;
            ++agree_n;
        }
    }
    contrast.total_instances = static_cast<int>(flagged_values.size());
    contrast.differing_instances = diff_n;
    if (contrast.total_instances == 0) return contrast;
    contrast.overall_mean = all_sum / static_cast<double>(contrast.total_instances);
    if (diff_n > 0) contrast.differing_mean = diff_sum / static_cast<double>(diff_n);
    if (agree_n > 0) contrast.agreeing_mean = agree_sum / static_cast<double>(agree_n);
    if (contrast.differing_mean && contrast.overall_mean > 0.0) {
        contrast.pct_change_vs_all =
            100.0 * (*contrast.differing_mean - contrast.overall_mean) /
            contrast.overall_mean;
    }
    if (contrast.differing_mean && contrast.agreeing_mean && *contrast.agreeing_mean > 0.0) {
        contrast.pct_change_vs_agreeing =
            100.0 * (*contrast.differing_mean - *contrast.agreeing_mean) /
            *contrast.agreeing_mean;
    }
    return contrast;
}

}  // namespace

DeltaResult delta_popularity(const std::vector<RunEntry>& baseline,
                             const std::vector<RunEntry>& joint,
                             const PopularityProfile& other_task_profile) {
    auto pairs = align_runs(baseline, joint);
    DeltaResult result;
    result.instances = static_cast<int>(pairs.size());
    if (pairs.empty()) return result;
    auto mean_popularity = [&](const RunEntry& entry) {
        if (entry.list.entries.empty()) return 0.0;
        double sum = 0.0;
        for (const auto& scored : entry.list.entries) {
            sum += other_task_profile.count(scored.item);
        }
        return sum / static_cast<double>(entry.list.entries.size());
    };
    double base_sum = 0.0, joint_sum = 0.0;
    for (const auto& [base_entry, joint_entry] : pairs) {
        base_sum += mean_popularity(*base_entry);
        joint_sum += mean_popularity(*joint_entry);
    }
    result.baseline_mean = base_sum / static_cast<double>(pairs.size());
    result.joint_mean = joint_sum / static_cast<double>(pairs.size());
    if (result.baseline_mean > 0.0) {
        result.percent_change =
            100.0 * (result.joint_mean - result.baseline_mean) / result.baseline_mean;
    } else if (result.joint_mean == 0.0) {
        result.percent_change = 0.0;
    }
    return result;
}

SubsetContrast history_target_query_matches(const std::vector<RecTestCase>& cases,
                                            const SearchDataset& search_train,
                                            const std::vector<RunEntry>& baseline,
                                            const std::vector<RunEntry>& joint) {
    auto pairs = align_runs(baseline, joint);
    std::unordered_map<std::string, std::size_t> case_index;
    for (std::size_t i = 0; i < cases.size(); ++i) case_index[cases[i].id] = i;

    // pair {a,b} -> number of unique train queries with both in the set
    std::unordered_map<std::uint64_t, int> pair_query_count;
    for (const auto& [text, items] : qrels_by_text(search_train, Split::Train)) {
        std::vector<ItemId> list(items.begin(), items.end());
        for (std::size_t i = 0; i < list.size(); ++i) {
            for (std::size_t j = i + 1; j < list.size(); ++j) {
                ++pair_query_count[pair_key(list[i], list[j])];
            }
        }
    }

    std::vector<std::pair<bool, double>> values;
    values.reserve(pairs.size());
    for (const auto& [base_entry, joint_entry] : pairs) {
        auto it = case_index.find(base_entry->query_id);
        if (it == case_index.end()) {
            throw std::invalid_argument("run id not among the rec test cases: " +
                                        base_entry->query_id);
        }
        const RecTestCase& test_case = cases[it->second];
        std::set<ItemId> distinct_history(test_case.history.begin(),
                                          test_case.history.end());
        double count = 0.0;
        for (ItemId h : distinct_history) {
            if (h == test_case.target) continue;
            auto hit = pair_query_count.find(pair_key(h, test_case.target));
            if (hit != pair_query_count.end()) count += hit->second;
        }
        bool differs = run_items(base_entry->list) != run_items(joint_entry->list);
        values.emplace_back(differs, count);
    }
    return contrast_from_values(values);
}

SubsetContrast rel_pair_cooccurrence(const std::vector<SearchTestCase>& cases,
                                     const RecDataset& rec_train,
                                     const std::vector<RunEntry>& baseline,
                                     const std::vector<RunEntry>& joint) {
    auto pairs = align_runs(baseline, joint);
    std::unordered_map<std::string, std::size_t> case_index;
    for (std::size_t i = 0; i < cases.size(); ++i) case_index[cases[i].id] = i;

    // item -> users whose training-portion history contains it
    std::unordered_map<ItemId, std::set<int>> users_with_item;
    for (const auto& user : rec_train.users) {
        std::size_t limit = user.interactions.size();
        if (limit >= 2) limit -= 2;  // exclude validation/test targets
        for (std::size_t i = 0; i < limit; ++i) {
            users_with_item[user.interactions[i]].insert(user.user_id);
        }
    }
    auto cooccurrence = [&](ItemId a, ItemId b) {
        auto ia = users_with_item.find(a);
        auto ib = users_with_item.find(b);
        if (ia == users_with_item.end() || ib == users_with_item.end()) return 0;
        const auto& small = (ia->second.size() <= ib->second.size()) ? ia->second : ib->second;
        const auto& large = (ia->second.size() <= ib->second.size()) ? ib->second : ia->second;
        int n = 0;
        for (int user : small) n += large.count(user) ? 1 : 0;
        return n;
    };

    std::vector<std::pair<bool, double>> values;
    for (const auto& [base_entry, joint_entry] : pairs) {
        auto it = case_index.find(base_entry->query_id);
        if (it == case_index.end()) {
            throw std::invalid_argument("run id not among the search test cases: " +
                                        base_entry->query_id);
        }
        const SearchTestCase& test_case = cases[it->second];
        std::set<ItemId> distinct(test_case.relevance.begin(), test_case.relevance.end());
        if (distinct.size() < 2) continue;  // no pairs to average
        std::vector<ItemId> rel(distinct.begin(), distinct.end());
        double sum = 0.0;
        int pair_count = 0;
        for (std::size_t i = 0; i < rel.size(); ++i) {
            for (std::size_t j = i + 1; j < rel.size(); ++j) {
                sum += cooccurrence(rel[i], rel[j]);
                ++pair_count;
            }
        }
        bool differs = run_items(base_entry->list) != run_items(joint_entry->list);
        values.emplace_back(differs, sum / static_cast<double>(pair_count));
    }
    return contrast_from_values(values);
}

namespace {

std::unordered_set<std::uint64_t> rec_train_pairs(const RecDataset& rec_train) {
    std::unordered_set<std::uint64_t> pairs;
    for (const auto& user : rec_train.users) {
        std::size_t limit = user.interactions.size();
        if (limit >= 2) limit -= 2;
        std::set<ItemId> distinct(user.interactions.begin(),
                                  user.interactions.begin() + static_cast<long>(limit));
        std::vector<ItemId> items(distinct.begin(), distinct.end());
        for (std::size_t i = 0; i < items.size(); ++i) {
            for (std::size_t j = i + 1; j < items.size(); ++j) {
                pairs.insert(pair_key(items[i], items[j]));
            }
        }
    }
    return pairs;
}

std::unordered_set<std::uint64_t> search_train_pairs(const SearchDataset& search_train) {
    std::unordered_set<std::uint64_t> pairs;
    for (const auto& [text, items] : qrels_by_text(search_train, Split::Train)) {
        std::vector<ItemId> list(items.begin(), items.end());
        for (std::size_t i = 0; i < list.size(); ++i) {
            for (std::size_t j = i + 1; j < list.size(); ++j) {
                pairs.insert(pair_key(list[i], list[j]));
            }
        }
    }
    return pairs;
}

struct CasePairView {
    std::string id;
    std::vector<std::uint64_t> pairs;
    std::vector<ItemId> relevance;
};

RedundancyReport redundancy_from_views(
    const std::vector<CasePairView>& views,
    const std::unordered_set<std::uint64_t>& target_pairs,
    const std::unordered_set<std::uint64_t>& other_pairs,
    const std::vector<RunEntry>& baseline, const std::vector<RunEntry>& joint, int k) {
    auto aligned = align_runs(baseline, joint);
    std::unordered_map<std::string, std::pair<const RunEntry*, const RunEntry*>> by_id;
    for (const auto& [b, j] : aligned) by_id[b->query_id] = {b, j};

    RedundancyReport report;
    std::unordered_set<std::uint64_t> redundant_seen, non_redundant_seen;
    double red_base = 0.0, red_joint = 0.0, non_base = 0.0, non_joint = 0.0;

    for (const auto& view : views) {
        auto it = by_id.find(view.id);
        if (it == by_id.end()) {
            throw std::invalid_argument("redundancy analysis: no run entries for " + view.id);
        }
        bool involves_redundant = false, involves_non_redundant = false;
        for (std::uint64_t pair : view.pairs) {
            bool in_target = target_pairs.count(pair) > 0;
            bool in_other = other_pairs.count(pair) > 0;
            if (in_target && in_other) {
                involves_redundant = true;
                redundant_seen.insert(pair);
            } else if (!in_target && in_other) {
                involves_non_redundant = true;
                non_redundant_seen.insert(pair);
            }
        }
        if (!involves_redundant && !involves_non_redundant) continue;
        double base_recall = recall_at_k(it->second.first->list, view.relevance, k);
        double joint_recall = recall_at_k(it->second.second->list, view.relevance, k);
        if (involves_redundant) {
            ++report.redundant_instances;
            red_base += base_recall;
            red_joint += joint_recall;
        }
        if (involves_non_redundant) {
            ++report.non_redundant_instances;
            non_base += base_recall;
            non_joint += joint_recall;
        }
    }
    report.redundant_pairs = static_cast<long long>(redundant_seen.size());
    report.non_redundant_pairs = static_cast<long long>(non_redundant_seen.size());
    if (report.redundant_instances > 0) {
        double rb = red_base / report.redundant_instances;
        double rj = red_joint / report.redundant_instances;
        if (rb > 0.0) {
            report.redundant_improvement_pct = 100.0 * (rj - rb) / rb;
        } else if (rj == 0.0) {
            report.redundant_improvement_pct = 0.0;
        }
    }
    if (report.non_redundant_instances > 0) {
        double nb = non_base / report.non_redundant_instances;
        double nj = non_joint / report.non_redundant_instances;
        if (nb > 0.0) {
            report.non_redundant_improvement_pct = 100.0 * (nj - nb) / nb;
        } else if (nj == 0.0) {
            report.non_redundant_improvement_pct = 0.0;
        }
    }
    return report;
}

}  // namespace

RedundancyReport redundancy_analysis_rec(const std::vector<RecTestCase>& cases,
                                         const RecDataset& rec_train,
                                         const SearchDataset& search_train,
                                         const std::vector<RunEntry>& baseline,
                                         const std::vector<RunEntry>& joint, int k) {
    auto target_pairs = rec_train_pairs(rec_train);
    auto other_pairs = search_train_pairs(search_train);
    std::vector<CasePairView> views;
    views.reserve(cases.size());
    for (const auto& c : cases) {
        CasePairView view;
        view.id = c.id;
        view.relevance = {c.target};
        std::set<ItemId> distinct(c.history.begin(), c.history.end());
        for (ItemId h : distinct) {
            if (h != c.target) view.pairs.push_back(pair_key(h, c.target));
        }
        views.push_back(std::move(view));
    }
    return redundancy_from_views(views, target_pairs, other_pairs, baseline, joint, k);
}

RedundancyReport redundancy_analysis_search(const std::vector<SearchTestCase>& cases,
                                            const RecDataset& rec_train,
                                            const SearchDataset& search_train,
                                            const std::vector<RunEntry>& baseline,
                                            const std::vector<RunEntry>& joint, int k) {
    auto target_pairs = search_train_pairs(search_train);
    auto other_pairs = rec_train_pairs(rec_train);
    std::vector<CasePairView> views;
    views.reserve(cases.size());
    for (const auto& c : cases) {
        CasePairView view;
        view.id = c.id;
        view.relevance = c.relevance;
        std::set<ItemId> distinct(c.relevance.begin(), c.relevance.end());
        std::vector<ItemId> rel(distinct.begin(), distinct.end());
        for (std::size_t i = 0; i < rel.size(); ++i) {
            for (std::size_t j = i + 1; j < rel.size(); ++j) {
                view.pairs.push_back(pair_key(rel[i], rel[j]));
            }
        }
        views.push_back(std::move(view));
    }
    return redundancy_from_views(views, target_pairs, other_pairs, baseline, joint, k);
}

namespace {

std::vector<double> matvec(const std::vector<double>& m, const std::vector<double>& v,
                           int d) {
    std::vector<double> out(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) {
            acc += m[static_cast<std::size_t>(i) * static_cast<std::size_t>(d) +
                     static_cast<std::size_t>(j)] *
                   v[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Leading eigenpair by fixed-iteration power method; returns a zero vector
// when the matrix is (numerically) null in the explored direction.
std::pair<std::vector<double>, double> power_iteration(const std::vector<double>& cov,
                                                       int d) {
    std::vector<double> v(static_cast<std::size_t>(d),
                          1.0 / std::sqrt(static_cast<double>(d)));
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<double> next = matvec(cov, v, d);
        double n = norm(next);
        if (n < 1e-15) return {std::vector<double>(static_cast<std::size_t>(d), 0.0), 0.0};
        for (double& x : next) x /= n;
        v = std::move(next);
    }
    std::vector<double> cv = matvec(cov, v, d);
    double eigenvalue = 0.0;
    for (int i = 0; i < d; ++i) {
        eigenvalue += v[static_cast<std::size_t>(i)] * cv[static_cast<std::size_t>(i)];
    }
    // sign convention: largest-magnitude coordinate positive
    int arg = 0;
    for (int i = 1; i < d; ++i) {
        if (std::abs(v[static_cast<std::size_t>(i)]) >
            std::abs(v[static_cast<std::size_t>(arg)])) {
            arg = i;
        }
    }
    if (v[static_cast<std::size_t>(arg)] < 0.0) {
        for (double& x : v) x = -x;
    }
    return {v, eigenvalue};
}

}  // namespace

ProjectionResult project_embeddings(const RetrieverParams& params,
                                    const PopularityProfile& profile,
                                    const std::vector<int>& cluster_of_item) {
    const int n = params.num_items;
    const int d = params.embedding_dim;
    if (static_cast<int>(profile.counts.size()) != n) {
        throw std::invalid_argument("project_embeddings: profile does not match catalog");
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(n));
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
    for (ItemId i = 0; i < n; ++i) {
        rows.push_back(item_embedding(params, i));
        for (int k = 0; k < d; ++k) mean[static_cast<std::size_t>(k)] += rows.back()[static_cast<std::size_t>(k)];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (auto& row : rows) {
        for (int k = 0; k < d; ++k) row[static_cast<std::size_t>(k)] -= mean[static_cast<std::size_t>(k)];
    }
    std::vector<double> cov(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), 0.0);
    for (const auto& row : rows) {
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                cov[static_cast<std::size_t>(i) * static_cast<std::size_t>(d) +
                    static_cast<std::size_t>(j)] +=
                    row[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(j)];
            }
        }
    }
    for (double& c : cov) c /= static_cast<double>(n);

    auto [v1, lambda1] = power_iteration(cov, d);
    // deflate and repeat for the second axis
    std::vector<double> deflated = cov;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            deflated[static_cast<std::size_t>(i) * static_cast<std::size_t>(d) +
                     static_cast<std::size_t>(j)] -=
                lambda1 * v1[static_cast<std::size_t>(i)] * v1[static_cast<std::size_t>(j)];
        }
    }
    auto [v2, lambda2] = power_iteration(deflated, d);

    ProjectionResult result;
    result.second_axis_degenerate = (lambda2 < 1e-12);
    if (result.second_axis_degenerate) {
        std::fill(v2.begin(), v2.end(), 0.0);
    }
    for (ItemId i = 0; i < n; ++i) {
        ProjectedItem point;
        point.item = i;
        for (int k = 0; k < d; ++k) {
            point.x += rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                       v1[static_cast<std::size_t>(k)];
            point.y += rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                       v2[static_cast<std::size_t>(k)];
        }
        point.popularity = profile.count(i);
        if (!cluster_of_item.empty()) {
            point.cluster = cluster_of_item[static_cast<std::size_t>(i)];
        }
        result.points.push_back(point);
    }
    return result;
}

}  // namespace genir
