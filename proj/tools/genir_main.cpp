// genir: simulate, train, retrieve, evaluate, and analyze joint
// search-and-recommendation generative retrieval experiments.
//
// Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "genir/config.hpp"
#include "genir/corpus.hpp"
#include "genir/decode.hpp"
#include "genir/evalkit.hpp"
#include "genir/hypolab.hpp"
#include "genir/io.hpp"
#include "genir/retriever.hpp"
#include "genir/rng.hpp"
#include "genir/simgen.hpp"
#include "genir/statmetrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace genir;

namespace {

std::string format_double(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

std::string format_opt(const std::optional<double>& v, int precision = 6) {
    return v ? format_double(*v, precision) : "NA";
}

// Experiment defaults differ from the plain training defaults: the
// desk-scale model needs a bias-dominant setup for the
// popularity sweep and longer training for the co-occurrence sweeps. A
// --config file overrides these like everything else.
AppConfig experiment_base_config(const std::string& family) {
    AppConfig base;
    if (family == "sim1") {
        base.retriever.embedding_dim = 8;
        base.retriever.weight_decay = 5.0;
    } else if (family == "sim2") {
        base.retriever.epochs = 8;
        base.sim2.num_users = 600;
    } else if (family == "sim3") {
        base.retriever.epochs = 15;
        base.sim3.num_topics = 16;
    }
    return base;
}

json retriever_config_json(const RetrieverConfig& c) {
    return {{"embedding_dim", c.embedding_dim},
            {"learning_rate", c.learning_rate},
            {"weight_decay", c.weight_decay},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"tie_output_embeddings", c.tie_output_embeddings},
            {"seed", c.seed}};
}

// GENIR_SEED overrides every configured seed (for CI).
std::optional<std::uint64_t> env_seed() {
    const char* value = std::getenv("GENIR_SEED");
    if (!value || !*value) return std::nullopt;
    try {
        return std::stoull(value);
    } catch (const std::exception&) {
        throw std::invalid_argument("GENIR_SEED is not an unsigned integer");
    }
}

// ---------------------------------------------------------------------------
// shared command plumbing
// ---------------------------------------------------------------------------

struct CommandContext {
    std::string command_line;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    RunManifest manifest;

    explicit CommandContext(const std::string& cmdline) : command_line(cmdline) {
        manifest.command = cmdline;
    }
    void add_input(const fs::path& p) {
        manifest.input_hashes[p.string()] = file_hash(p);
    }
    void add_output(const fs::path& p) { manifest.outputs.push_back(p.string()); }
    void finish(const fs::path& dir) {
        manifest.wall_clock_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                      start)
                .count();
        write_manifest(dir, manifest);
    }
};

struct LoadedData {
    SearchDataset search;
    RecDataset rec;
    int num_items = 0;
};

LoadedData load_data_dir(CommandContext& ctx, const fs::path& dir) {
    LoadedData data;
    fs::path catalog = dir / "catalog.json";
    fs::path search = dir / "search.jsonl";
    fs::path rec = dir / "rec.jsonl";
    data.num_items = read_catalog(catalog);
    data.search = read_search_jsonl(search, data.num_items);
    data.rec = read_rec_jsonl(rec, data.num_items);
    ctx.add_input(catalog);
    ctx.add_input(search);
    ctx.add_input(rec);
    return data;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

void write_sim_output(CommandContext& ctx, const SimOutput& sim, const fs::path& out_dir,
                      const json& config_echo) {
    fs::create_directories(out_dir);
    write_rec_jsonl(out_dir / "rec.jsonl", sim.rec);
    write_search_jsonl(out_dir / "search.jsonl", sim.search);
    write_catalog(out_dir / "catalog.json", std::max(sim.rec.num_items, sim.search.num_items));

    json meta;
    meta["family"] = sim.family;
    meta["seed"] = sim.seed;
    meta["config"] = config_echo;
    meta["rec_train_instances"] = sim.rec_train_instances;
    meta["search_train_instances"] = sim.search_train_instances;
    meta["warnings"] = sim.warnings;
    if (sim.family == "sim1") {
        meta["achieved_kld"] = sim.achieved_kld;
        meta["rec_popularity"] = sim.rec_popularity.probs;
        meta["search_popularity"] = sim.search_popularity.probs;
    }
    if (sim.family == "sim2") {
        meta["query_match_pct"] = sim.query_match_pct;
        // the sample column is applied to the target task's training
        // instances at experiment time; recorded here for traceability
        meta["sample_fraction"] = sim.sample_fraction;
        meta["cluster_of_item"] = sim.cluster_of_item;
    }
    if (sim.family == "sim3") {
        meta["target_pairs_pct"] = sim.target_pairs_pct;
        meta["achieved_pairs_pct"] = sim.achieved_pairs_pct;
        meta["cluster_of_item"] = sim.cluster_of_item;
    }
    atomic_write(out_dir / "meta.json", meta.dump(2) + "\n");

    ctx.add_output(out_dir / "rec.jsonl");
    ctx.add_output(out_dir / "search.jsonl");
    ctx.add_output(out_dir / "catalog.json");
    ctx.add_output(out_dir / "meta.json");
    ctx.manifest.seeds = {sim.seed};
    ctx.manifest.config_json = config_echo.dump();
    ctx.finish(out_dir);

    for (const auto& warning : sim.warnings) std::cerr << "warning: " << warning << "\n";
    std::cout << "wrote " << sim.family << " dataset to " << out_dir.string() << " ("
              << sim.rec_train_instances << " rec / " << sim.search_train_instances
              << " search train instances)\n";
}

// ---------------------------------------------------------------------------
// train / retrieve / evaluate / stats
// ---------------------------------------------------------------------------

void run_train(CommandContext& ctx, const std::string& mode, const fs::path& data_dir,
               const RetrieverConfig& config, const fs::path& out_dir) {
    LoadedData data = load_data_dir(ctx, data_dir);
    Vocabulary vocab = build_vocabulary(data.search, data.rec);

    std::vector<TrainingInstance> instances;
    std::vector<TrainingInstance> search_train =
        search_instances(data.search, vocab, Split::Train);
    RecSplitResult splits = rec_split(data.rec, vocab);
    if (mode == "search") {
        instances = std::move(search_train);
    } else if (mode == "rec") {
        instances = std::move(splits.train);
    } else {
        JointOptions opts;
        opts.seed = config.seed;
        instances = joint_instances(search_train, splits.train, vocab, opts);
    }
    if (splits.skipped_users > 0) {
        std::cerr << "warning: skipped " << splits.skipped_users
                  << " user(s) with fewer than 5 interactions\n";
    }

    TrainReport report = train(config, instances, vocab);

    fs::create_directories(out_dir);
    fs::path ckpt = out_dir / ("model_" + mode + ".ckpt");
    save_checkpoint(ckpt, report.params, config, vocab.content_hash());
    json report_json;
    report_json["mode"] = mode;
    report_json["epoch_losses"] = report.epoch_losses;
    report_json["num_instances"] = report.num_instances;
    report_json["seed"] = report.seed;
    atomic_write(out_dir / ("train_report_" + mode + ".json"), report_json.dump(2) + "\n");

    ctx.add_output(ckpt);
    ctx.add_output(out_dir / ("train_report_" + mode + ".json"));
    ctx.manifest.seeds = {config.seed};
    ctx.manifest.config_json = retriever_config_json(config).dump();
    ctx.finish(out_dir);

    std::cout << "trained " << mode << " model on " << report.num_instances
              << " instances; final loss "
              << (report.epoch_losses.empty() ? 0.0 : report.epoch_losses.back()) << "\n";
}

void run_retrieve(CommandContext& ctx, const fs::path& data_dir, const fs::path& model_path,
                  const std::string& task, const std::string& split_name, int k,
                  bool use_beam, const BeamConfig& beam, const fs::path& run_path,
                  const std::string& qrels_out) {
    LoadedData data = load_data_dir(ctx, data_dir);
    ctx.add_input(model_path);
    Checkpoint ckpt = load_checkpoint(model_path);
    Vocabulary vocab = build_vocabulary(data.search, data.rec);
    if (vocab.content_hash() != ckpt.vocab_hash) {
        throw std::invalid_argument(
            "checkpoint was trained against a different vocabulary (hash mismatch)");
    }
    if (vocab.size() != ckpt.params.vocab_size) {
        throw std::invalid_argument("checkpoint dimensions do not match the vocabulary");
    }
    Split split = split_from_string(split_name);

    // Single-token atomic IDs: depth-1 scorer over the item softmax.
    struct ItemScorer final : NextTokenScorer {
        const RetrieverParams* params;
        std::vector<TokenIndex> input;
        int token_count() const override { return params->num_items; }
        bool is_terminal(std::span<const TokenIndex> prefix) const override {
            return prefix.size() == 1;
        }
        void next_scores(std::span<const TokenIndex>, std::vector<double>& log_scores,
                         std::vector<char>& valid) const override {
            std::vector<double> probs = forward(*params, input);
            for (int i = 0; i < params->num_items; ++i) {
                log_scores[static_cast<std::size_t>(i)] =
                    std::log(probs[static_cast<std::size_t>(i)]);
                valid[static_cast<std::size_t>(i)] = 1;
            }
        }
        std::optional<ItemId> sequence_item(std::span<const TokenIndex> seq) const override {
            return static_cast<ItemId>(seq[0]);
        }
    };

    auto predict = [&](const std::vector<TokenIndex>& input) {
        if (!use_beam) return retrieve(ckpt.params, input, k);
        ItemScorer scorer;
        scorer.params = &ckpt.params;
        scorer.input = input;
        BeamConfig cfg = beam;
        cfg.k = k;
        cfg.max_depth = 1;
        return diverse_beam_search(scorer, cfg);
    };

    std::vector<RunEntry> run;
    std::vector<QrelEntry> qrels;
    if (task == "rec") {
        RecSplitResult splits = rec_split(data.rec, vocab);
        auto cases = rec_eval_cases(data.rec, vocab, split, splits.train);
        for (const auto& c : cases) {
            run.push_back({c.id, predict(c.input)});
            qrels.push_back({c.id, Task::Rec, {c.target}});
        }
    } else {
        auto cases = search_eval_cases(data.search, vocab, split);
        for (const auto& c : cases) {
            run.push_back({c.id, predict(c.input)});
            qrels.push_back({c.id, Task::Search, c.relevance});
        }
    }
    write_trec_run(run_path, run, "genir_" + task);
    ctx.add_output(run_path);
    if (!qrels_out.empty()) {
        write_qrels_jsonl(qrels_out, qrels);
        ctx.add_output(qrels_out);
    }
    fs::path manifest_dir =
        run_path.has_parent_path() ? run_path.parent_path() : fs::path(".");
    ctx.finish(manifest_dir);
    std::cout << "wrote run with " << run.size() << " queries to " << run_path.string()
              << "\n";
}

void run_evaluate(CommandContext& ctx, const fs::path& run_path, const fs::path& qrels_path,
                  int k, const std::string& baseline_path, const std::string& data_dir,
                  const std::string& bucket_task, const fs::path& out_path) {
    ctx.add_input(run_path);
    ctx.add_input(qrels_path);
    std::vector<RunEntry> run = read_trec_run(run_path);
    std::vector<QrelEntry> qrels = read_qrels_jsonl(qrels_path);
    std::map<std::string, const QrelEntry*> qrels_by_id;
    for (const auto& q : qrels) qrels_by_id[q.query_id] = &q;

    std::optional<BucketAssignment> buckets;
    if (!data_dir.empty()) {
        LoadedData data = load_data_dir(ctx, fs::path(data_dir));
        std::vector<double> counts =
            (bucket_task == "rec")
                ? popularity_profile(data.rec, /*train_only=*/true).counts
                : popularity_profile(data.search, Split::Train).counts;
        buckets = head_torso_buckets(counts);
    }

    std::vector<EvalInstance> instances;
    for (const auto& entry : run) {
        auto it = qrels_by_id.find(entry.query_id);
        if (it == qrels_by_id.end()) {
            throw std::invalid_argument("run id has no qrels entry: " + entry.query_id);
        }
        EvalInstance inst;
        inst.id = entry.query_id;
        inst.task = it->second->task;
        inst.relevance = it->second->relevant;
        inst.prediction = entry.list;
        instances.push_back(std::move(inst));
    }
    EvalReport report = buckets ? bucketed_evaluate(instances, *buckets, k)
                                : evaluate(instances, k);

    std::optional<TTestResult> ttest;
    if (!baseline_path.empty()) {
        ctx.add_input(fs::path(baseline_path));
        std::vector<RunEntry> baseline = read_trec_run(fs::path(baseline_path));
        std::map<std::string, const RankedList*> base_by_id;
        for (const auto& b : baseline) base_by_id[b.query_id] = &b.list;
        std::vector<double> a, b;
        for (const auto& inst : instances) {
            auto it = base_by_id.find(inst.id);
            if (it == base_by_id.end()) {
                throw std::invalid_argument("baseline run misses id: " + inst.id);
            }
            a.push_back(recall_at_k(inst.prediction, inst.relevance, k));
            b.push_back(recall_at_k(*it->second, inst.relevance, k));
        }
        ttest = paired_t_test(a, b);
    }

    double inst_std = 0.0;
    if (report.per_instance_recall.size() > 1) {
        double m = report.mean_recall, ss = 0.0;
        for (double r : report.per_instance_recall) ss += (r - m) * (r - m);
        inst_std = std::sqrt(ss / static_cast<double>(report.per_instance_recall.size() - 1));
    }
    std::vector<std::vector<std::string>> rows;
    std::string p_col = ttest ? format_double(ttest->p_value) : "NA";
    rows.push_back({"recall@" + std::to_string(k), "All", format_double(report.mean_recall),
                    format_double(inst_std), p_col});
    if (buckets) {
        rows.push_back({"recall@" + std::to_string(k), "Head",
                        format_opt(report.head_recall), "NA", "NA"});
        rows.push_back({"recall@" + std::to_string(k), "Torso",
                        format_opt(report.torso_recall), "NA", "NA"});
    }
    write_csv(out_path, {"metric", "bucket", "mean", "std", "p_value_vs_baseline"}, rows);
    ctx.add_output(out_path);
    fs::path manifest_dir =
        out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    ctx.finish(manifest_dir);

    std::cout << "recall@" << k << " All " << format_double(report.mean_recall);
    if (report.head_recall) std::cout << " Head " << format_double(*report.head_recall);
    if (report.torso_recall) std::cout << " Torso " << format_double(*report.torso_recall);
    if (ttest) std::cout << " p=" << format_double(ttest->p_value);
    std::cout << "\n";
}

void run_stats(CommandContext& ctx, const fs::path& data_dir, const fs::path& out_path) {
    LoadedData data = load_data_dir(ctx, data_dir);
    DatasetStats stats = dataset_stats(data.search, data.rec);
    std::vector<std::vector<std::string>> rows = {
        {"num_items", std::to_string(stats.num_items)},
        {"num_users", std::to_string(stats.num_users)},
        {"num_queries", std::to_string(stats.num_queries)},
        {"density", format_double(stats.density, 8)},
        {"avg_rel_per_query", format_double(stats.avg_rel_per_query)},
        {"gini_search", format_double(stats.gini_search)},
        {"gini_rec", format_double(stats.gini_rec)},
        {"ks_dist", format_double(stats.ks_dist)},
        {"kld_search_rec", format_double(stats.kld_sr)},
        {"kld_rec_search", format_double(stats.kld_rs)},
    };
    write_csv(out_path, {"stat", "value"}, rows);
    ctx.add_output(out_path);
    json j;
    for (const auto& row : rows) j[row[0]] = row[1];
    fs::path json_path = out_path;
    json_path.replace_extension(".json");
    atomic_write(json_path, j.dump(2) + "\n");
    ctx.add_output(json_path);
    fs::path manifest_dir =
        out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    ctx.finish(manifest_dir);
    for (const auto& row : rows) std::cout << row[0] << " = " << row[1] << "\n";
}

// ---------------------------------------------------------------------------
// experiments and analyses
// ---------------------------------------------------------------------------

void write_sweep_csv(const fs::path& path, const std::vector<std::string>& header,
                     const SweepResult& result) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& cell : result.cells) {
        // the cap ablation's task-specific anchor has no cap level
        std::string level = cell.level <= -2.0 ? "NA" : format_double(cell.level, 4);
        rows.push_back({level, format_double(cell.level_detail, 6), cell.model,
                        format_double(cell.mean_recall), format_double(cell.std_recall),
                        format_opt(cell.p_value_vs_specific)});
    }
    write_csv(path, header, rows);
}

void run_experiment_sim1(CommandContext& ctx, const Sim1ExperimentSpec& spec,
                         const fs::path& out_dir) {
    SweepResult result = run_sim1_experiment(spec);
    fs::create_directories(out_dir);
    fs::path csv = out_dir / "fig3_sim1.csv";
    write_sweep_csv(csv, {"shuffle_swaps", "achieved_kld", "model", "mean_recall",
                          "std_recall", "p_value_vs_specific"},
                    result);
    ctx.add_output(csv);
    ctx.manifest.seeds = experiment_seeds(spec.base.seed, spec.num_seeds);
    ctx.manifest.config_json =
        json{{"levels", spec.swap_levels},
             {"num_seeds", spec.num_seeds},
             {"recall_k", spec.recall_k},
             {"retriever", retriever_config_json(spec.retriever)}}
            .dump();
    ctx.finish(out_dir);
    std::cout << "wrote " << csv.string() << "\n";
}

void run_experiment_sim2(CommandContext& ctx, const Sim2ExperimentSpec& spec,
                         const fs::path& out_dir) {
    SweepResult result = run_sim2_experiment(spec);
    fs::create_directories(out_dir);
    fs::path csv = out_dir / "table3_sim2.csv";
    write_sweep_csv(csv, {"query_match_pct", "sample_fraction", "model", "mean_recall",
                          "std_recall", "p_value_vs_specific"},
                    result);
    ctx.add_output(csv);
    ctx.manifest.seeds = experiment_seeds(spec.base.seed, spec.num_seeds);
    ctx.manifest.config_json =
        json{{"levels", spec.match_levels},
             {"samples", spec.sample_fractions},
             {"num_seeds", spec.num_seeds},
             {"recall_k", spec.recall_k},
             {"retriever", retriever_config_json(spec.retriever)},
             {"note", "sample column interpreted as the fraction of target-task "
                      "training instances retained"}}
            .dump();
    ctx.finish(out_dir);
    std::cout << "wrote " << csv.string() << "\n";
}

void run_experiment_sim3(CommandContext& ctx, const Sim3ExperimentSpec& spec,
                         const fs::path& out_dir) {
    SweepResult result = run_sim3_experiment(spec);
    fs::create_directories(out_dir);
    fs::path csv = out_dir / "table3_sim3.csv";
    write_sweep_csv(csv, {"pairs_in_qrels_pct", "achieved_pairs_pct", "model",
                          "mean_recall", "std_recall", "p_value_vs_specific"},
                    result);
    ctx.add_output(csv);
    ctx.manifest.seeds = experiment_seeds(spec.base.seed, spec.num_seeds);
    ctx.manifest.config_json =
        json{{"levels", spec.pair_levels},
             {"num_seeds", spec.num_seeds},
             {"recall_k", spec.recall_k},
             {"retriever", retriever_config_json(spec.retriever)}}
            .dump();
    ctx.finish(out_dir);
    std::cout << "wrote " << csv.string() << "\n";
}

void run_experiment_cap(CommandContext& ctx, const CapAblationSpec& spec,
                        const fs::path& out_dir) {
    SweepResult result = run_cap_ablation(spec);
    fs::create_directories(out_dir);
    fs::path csv = out_dir / "fig5_cap.csv";
    write_sweep_csv(csv, {"cap", "added_instances_kept", "model", "mean_recall",
                          "std_recall", "p_value_vs_specific"},
                    result);
    ctx.add_output(csv);
    std::uint64_t base =
        (spec.family == CapFamily::Sim2) ? spec.sim2.seed : spec.sim3.seed;
    ctx.manifest.seeds = experiment_seeds(base, spec.num_seeds);
    ctx.manifest.config_json =
        json{{"caps", spec.caps},
             {"family", spec.family == CapFamily::Sim2 ? "sim2" : "sim3"},
             {"num_seeds", spec.num_seeds},
             {"recall_k", spec.recall_k},
             {"retriever", retriever_config_json(spec.retriever)}}
            .dump();
    ctx.finish(out_dir);
    std::cout << "wrote " << csv.string() << "\n";
}

struct AnalyzeInputs {
    LoadedData data;
    Vocabulary vocab;
    std::vector<RunEntry> baseline;
    std::vector<RunEntry> joint;
};

AnalyzeInputs load_analyze_inputs(CommandContext& ctx, const fs::path& data_dir,
                                  const fs::path& baseline_path, const fs::path& joint_path) {
    AnalyzeInputs inputs;
    inputs.data = load_data_dir(ctx, data_dir);
    inputs.vocab = build_vocabulary(inputs.data.search, inputs.data.rec);
    ctx.add_input(baseline_path);
    ctx.add_input(joint_path);
    inputs.baseline = read_trec_run(baseline_path);
    inputs.joint = read_trec_run(joint_path);
    return inputs;
}

void run_analyze_pop(CommandContext& ctx, const fs::path& data_dir,
                     const fs::path& baseline_path, const fs::path& joint_path,
                     const std::string& target_task, const fs::path& out_path) {
    AnalyzeInputs inputs = load_analyze_inputs(ctx, data_dir, baseline_path, joint_path);
    // other-task popularity: search profile when the target is rec, and vice versa
    PopularityProfile profile =
        (target_task == "rec")
            ? popularity_profile(inputs.data.search, Split::Train)
            : popularity_profile(inputs.data.rec, /*train_only=*/true);
    DeltaResult delta = delta_popularity(inputs.baseline, inputs.joint, profile);
    write_csv(out_path,
              {"target_task", "baseline_mean_pop", "joint_mean_pop", "percent_change",
               "instances", "scope"},
              {{target_task, format_double(delta.baseline_mean),
                format_double(delta.joint_mean), format_opt(delta.percent_change),
                std::to_string(delta.instances), "all_instances"}});
    ctx.add_output(out_path);
    fs::path manifest_dir =
        out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    ctx.finish(manifest_dir);
    std::cout << "delta popularity (" << target_task
              << "): " << format_opt(delta.percent_change) << "%\n";
}

void run_analyze_latent(CommandContext& ctx, const fs::path& data_dir,
                        const fs::path& baseline_path, const fs::path& joint_path,
                        const std::string& target_task, const fs::path& out_path) {
    AnalyzeInputs inputs = load_analyze_inputs(ctx, data_dir, baseline_path, joint_path);
    SubsetContrast contrast;
    std::string metric;
    if (target_task == "rec") {
        RecSplitResult splits = rec_split(inputs.data.rec, inputs.vocab);
        auto cases = rec_eval_cases(inputs.data.rec, inputs.vocab, Split::Test, splits.train);
        contrast = history_target_query_matches(cases, inputs.data.search, inputs.baseline,
                                                inputs.joint);
        metric = "history_target_query_matches";
    } else {
        auto cases = search_eval_cases(inputs.data.search, inputs.vocab, Split::Test);
        contrast =
            rel_pair_cooccurrence(cases, inputs.data.rec, inputs.baseline, inputs.joint);
        metric = "rel_pair_cooccurrence";
    }
    write_csv(out_path,
              {"metric", "differing_mean", "agreeing_mean", "overall_mean",
               "pct_change_vs_all", "pct_change_vs_agreeing", "differing_instances",
               "total_instances"},
              {{metric, format_opt(contrast.differing_mean),
                format_opt(contrast.agreeing_mean), format_double(contrast.overall_mean),
                format_opt(contrast.pct_change_vs_all),
                format_opt(contrast.pct_change_vs_agreeing),
                std::to_string(contrast.differing_instances),
                std::to_string(contrast.total_instances)}});
    ctx.add_output(out_path);
    fs::path manifest_dir =
        out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    ctx.finish(manifest_dir);
    std::cout << metric << ": differing mean " << format_opt(contrast.differing_mean)
              << " vs overall " << format_double(contrast.overall_mean) << "\n";
}

void run_analyze_redundancy(CommandContext& ctx, const fs::path& data_dir,
                            const fs::path& baseline_path, const fs::path& joint_path,
                            const std::string& target_task, int k,
                            const fs::path& out_path) {
    AnalyzeInputs inputs = load_analyze_inputs(ctx, data_dir, baseline_path, joint_path);
    RedundancyReport report;
    if (target_task == "rec") {
        RecSplitResult splits = rec_split(inputs.data.rec, inputs.vocab);
        auto cases = rec_eval_cases(inputs.data.rec, inputs.vocab, Split::Test, splits.train);
        report = redundancy_analysis_rec(cases, inputs.data.rec, inputs.data.search,
                                         inputs.baseline, inputs.joint, k);
    } else {
        auto cases = search_eval_cases(inputs.data.search, inputs.vocab, Split::Test);
        report = redundancy_analysis_search(cases, inputs.data.rec, inputs.data.search,
                                            inputs.baseline, inputs.joint, k);
    }
    write_csv(out_path, {"target_task", "class", "pairs", "instances", "improvement_pct"},
              {{target_task, "redundant", std::to_string(report.redundant_pairs),
                std::to_string(report.redundant_instances),
                format_opt(report.redundant_improvement_pct)},
               {target_task, "non_redundant", std::to_string(report.non_redundant_pairs),
                std::to_string(report.non_redundant_instances),
                format_opt(report.non_redundant_improvement_pct)}});
    ctx.add_output(out_path);
    fs::path manifest_dir =
        out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    ctx.finish(manifest_dir);
    std::cout << "redundant pairs " << report.redundant_pairs << " (improv "
              << format_opt(report.redundant_improvement_pct) << "%), non-redundant "
              << report.non_redundant_pairs << " (improv "
              << format_opt(report.non_redundant_improvement_pct) << "%)\n";
}

void run_project(CommandContext& ctx, const fs::path& data_dir, const fs::path& model_path,
                 const std::string& profile_task, const fs::path& out_path) {
    LoadedData data = load_data_dir(ctx, data_dir);
    ctx.add_input(model_path);
    Checkpoint ckpt = load_checkpoint(model_path);
    Vocabulary vocab = build_vocabulary(data.search, data.rec);
    if (vocab.content_hash() != ckpt.vocab_hash) {
        throw std::invalid_argument(
            "checkpoint was trained against a different vocabulary (hash mismatch)");
    }
    PopularityProfile profile =
        (profile_task == "rec") ? popularity_profile(data.rec, /*train_only=*/true)
                                : popularity_profile(data.search, Split::Train);
    std::vector<int> clusters;
    fs::path meta_path = data_dir / "meta.json";
    if (fs::exists(meta_path)) {
        std::ifstream meta_in(meta_path);
        json meta = json::parse(meta_in);
        if (meta.contains("cluster_of_item")) {
            clusters = meta.at("cluster_of_item").get<std::vector<int>>();
        }
    }
    ProjectionResult projection = project_embeddings(ckpt.params, profile, clusters);
    if (projection.second_axis_degenerate) {
        std::cerr << "warning: covariance is rank-deficient; second axis zeroed\n";
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : projection.points) {
        rows.push_back({std::to_string(p.item), format_double(p.x, 9),
                        format_double(p.y, 9), format_double(p.popularity, 3),
                        p.cluster ? std::to_string(*p.cluster) : "NA"});
    }
    write_csv(out_path, {"item", "x", "y", "popularity", "cluster"}, rows);
    ctx.add_output(out_path);
    fs::path manifest_dir =
        out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    ctx.finish(manifest_dir);
    std::cout << "wrote projection of " << rows.size() << " items to " << out_path.string()
              << "\n";
}

std::string join_args(int argc, char** argv) {
    std::ostringstream out;
    for (int i = 0; i < argc; ++i) {
        if (i) out << " ";
        out << argv[i];
    }
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"genir: a desk-scale laboratory for joint generative search and "
                 "recommendation"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (defaults when omitted)");

    // ---- simulate ----
    auto* simulate = app.add_subcommand("simulate", "generate a simulated dataset pair");
    simulate->require_subcommand(1);
    std::string sim_out = "data";
    Sim1Config sim1_cfg;
    Sim2Config sim2_cfg;
    Sim3Config sim3_cfg;
    std::string topics_file;
    std::uint64_t seed_flag = 0;
    bool seed_given = false;

    auto* sim1_cmd = simulate->add_subcommand("sim1", "popularity-only signal");
    sim1_cmd->add_option("--items", sim1_cfg.num_items, "catalog size");
    sim1_cmd->add_option("--zipf", sim1_cfg.zipf_exponent, "zipf exponent");
    sim1_cmd->add_option("--users", sim1_cfg.num_users, "number of users");
    sim1_cmd->add_option("--interactions", sim1_cfg.interactions_per_user,
                         "interactions per user");
    sim1_cmd->add_option("--queries", sim1_cfg.num_queries,
                         "train queries (0 = match rec instances)");
    sim1_cmd->add_option("--swaps", sim1_cfg.shuffle_swaps, "distribution transpositions");
    sim1_cmd->add_option("--seed", seed_flag, "seed")->each([&](const std::string&) {
        seed_given = true;
    });
    sim1_cmd->add_option("-o,--output-dir", sim_out, "output directory");

    auto* sim2_cmd = simulate->add_subcommand("sim2", "cluster co-occurrence signal");
    sim2_cmd->add_option("--clusters", sim2_cfg.num_clusters, "number of clusters");
    sim2_cmd->add_option("--items-per-cluster", sim2_cfg.items_per_cluster,
                         "items per cluster");
    sim2_cmd->add_option("--users", sim2_cfg.num_users, "number of users");
    sim2_cmd->add_option("--interactions", sim2_cfg.interactions_per_user,
                         "interactions per user");
    sim2_cmd->add_option("--queries-per-cluster", sim2_cfg.queries_per_cluster,
                         "canonical queries per cluster");
    sim2_cmd->add_option("--query-match", sim2_cfg.query_match_pct,
                         "query match percentage in {0,0.25,0.5,0.75,1}");
    sim2_cmd->add_option("--sample", sim2_cfg.sample_fraction,
                         "target-task training fraction (recorded in metadata)");
    sim2_cmd->add_option("--seed", seed_flag, "seed")->each([&](const std::string&) {
        seed_given = true;
    });
    sim2_cmd->add_option("-o,--output-dir", sim_out, "output directory");

    auto* sim3_cmd = simulate->add_subcommand("sim3", "topic paraphrase signal");
    sim3_cmd->add_option("--topics", sim3_cfg.num_topics, "number of topics");
    sim3_cmd->add_option("--paraphrases", sim3_cfg.paraphrases_per_topic,
                         "paraphrases per topic");
    sim3_cmd->add_option("--relevant-per-topic", sim3_cfg.relevant_items_per_topic,
                         "relevant items per topic");
    sim3_cmd->add_option("--pairs-in-qrels", sim3_cfg.pairs_in_qrels_pct,
                         "target pair alignment in [0,1]");
    sim3_cmd->add_option("--users", sim3_cfg.num_users, "number of users (0 = derive)");
    sim3_cmd->add_option("--interactions", sim3_cfg.interactions_per_user,
                         "interactions per user");
    sim3_cmd->add_option("--topics-file", topics_file,
                         "JSON array of paraphrase lists replacing the built-in bank");
    sim3_cmd->add_option("--seed", seed_flag, "seed")->each([&](const std::string&) {
        seed_given = true;
    });
    sim3_cmd->add_option("-o,--output-dir", sim_out, "output directory");

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train a generative retriever");
    std::string train_mode;
    train_cmd->add_option("mode", train_mode, "search | rec | joint")
        ->check(CLI::IsMember({"search", "rec", "joint"}))
        ->required();
    std::string train_data = "data";
    std::string train_out = "models";
    RetrieverConfig train_config;
    bool train_untied = false;
    train_cmd->add_option("--data", train_data, "dataset directory")->required();
    train_cmd->add_option("-o,--output-dir", train_out, "output directory");
    train_cmd->add_option("--dim", train_config.embedding_dim, "embedding dimension");
    train_cmd->add_option("--lr", train_config.learning_rate, "learning rate");
    train_cmd->add_option("--weight-decay", train_config.weight_decay, "weight decay");
    train_cmd->add_option("--batch", train_config.batch_size, "batch size");
    train_cmd->add_option("--epochs", train_config.epochs, "epochs");
    train_cmd->add_flag("--untied", train_untied, "use a separate output embedding table");
    train_cmd->add_option("--seed", seed_flag, "seed")->each([&](const std::string&) {
        seed_given = true;
    });

    // ---- retrieve ----
    auto* retrieve_cmd = app.add_subcommand("retrieve", "produce a TREC run file");
    std::string retrieve_data = "data", retrieve_model, retrieve_task = "rec";
    std::string retrieve_split = "test", retrieve_out = "run.trec", qrels_out;
    int retrieve_k = 10;
    bool retrieve_beam = false;
    retrieve_cmd->add_option("--data", retrieve_data, "dataset directory")->required();
    retrieve_cmd->add_option("--model", retrieve_model, "checkpoint file")->required();
    retrieve_cmd->add_option("--task", retrieve_task, "search | rec")
        ->check(CLI::IsMember({"search", "rec"}));
    retrieve_cmd->add_option("--split", retrieve_split, "test | validation")
        ->check(CLI::IsMember({"test", "validation"}));
    retrieve_cmd->add_option("-k", retrieve_k, "list depth");
    retrieve_cmd->add_flag("--beam", retrieve_beam,
                           "decode with diversified beam search instead of top-k");
    retrieve_cmd->add_option("-o,--output", retrieve_out, "run file path");
    retrieve_cmd->add_option("--qrels-out", qrels_out, "also write the matching qrels");

    // ---- evaluate ----
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score a run against qrels");
    std::string eval_run, eval_qrels, eval_baseline, eval_data, eval_bucket_task = "rec";
    std::string eval_out = "report.csv";
    int eval_k = 10;
    evaluate_cmd->add_option("--run", eval_run, "TREC run file")->required();
    evaluate_cmd->add_option("--qrels", eval_qrels, "JSONL qrels file")->required();
    evaluate_cmd->add_option("-k", eval_k, "cutoff");
    evaluate_cmd->add_option("--baseline-run", eval_baseline,
                             "second run for a paired t-test");
    evaluate_cmd->add_option("--data", eval_data,
                             "dataset directory for Head/Torso buckets");
    evaluate_cmd->add_option("--bucket-task", eval_bucket_task,
                             "training counts used for buckets: search | rec")
        ->check(CLI::IsMember({"search", "rec"}));
    evaluate_cmd->add_option("-o,--output", eval_out, "CSV report path");

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "dataset summary statistics");
    std::string stats_data = "data", stats_out = "stats.csv";
    stats_cmd->add_option("--data", stats_data, "dataset directory")->required();
    stats_cmd->add_option("-o,--output", stats_out, "CSV path (JSON written alongside)");

    // ---- experiment ----
    auto* experiment = app.add_subcommand("experiment", "run a hypothesis sweep");
    experiment->require_subcommand(1);
    std::string exp_out = "results";
    int exp_seeds = 5;
    int exp_k = 10;
    std::vector<int> exp_swap_levels = {0, 1, 2, 4, 8};
    std::vector<double> exp_match_levels = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> exp_samples = {1.0};
    std::vector<double> exp_pair_levels = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<int> exp_caps = {0, 1, 2, 4, 8, -1};
    std::string cap_family = "sim2";

    auto* exp_sim1 = experiment->add_subcommand("sim1", "divergence sweep");
    exp_sim1->add_option("--levels", exp_swap_levels, "swap counts")->delimiter(',');
    exp_sim1->add_option("--seeds", exp_seeds, "training seeds");
    exp_sim1->add_option("-k", exp_k, "recall cutoff");
    exp_sim1->add_option("--seed", seed_flag, "base seed")->each([&](const std::string&) {
        seed_given = true;
    });
    exp_sim1->add_option("-o,--output-dir", exp_out, "output directory");

    auto* exp_sim2 = experiment->add_subcommand("sim2", "query match sweep");
    exp_sim2->add_option("--levels", exp_match_levels, "query match levels")->delimiter(',');
    exp_sim2->add_option("--samples", exp_samples, "sample fractions")->delimiter(',');
    exp_sim2->add_option("--seeds", exp_seeds, "training seeds");
    exp_sim2->add_option("-k", exp_k, "recall cutoff");
    exp_sim2->add_option("--seed", seed_flag, "base seed")->each([&](const std::string&) {
        seed_given = true;
    });
    exp_sim2->add_option("-o,--output-dir", exp_out, "output directory");

    auto* exp_sim3 = experiment->add_subcommand("sim3", "pairs-in-qrels sweep");
    exp_sim3->add_option("--levels", exp_pair_levels, "pair alignment levels")
        ->delimiter(',');
    exp_sim3->add_option("--seeds", exp_seeds, "training seeds");
    exp_sim3->add_option("-k", exp_k, "recall cutoff");
    exp_sim3->add_option("--seed", seed_flag, "base seed")->each([&](const std::string&) {
        seed_given = true;
    });
    exp_sim3->add_option("-o,--output-dir", exp_out, "output directory");

    auto* exp_cap = experiment->add_subcommand("cap", "per-item training cap ablation");
    exp_cap->add_option("--caps", exp_caps, "cap levels (-1 = uncapped)")->delimiter(',');
    exp_cap->add_option("--family", cap_family, "sim2 | sim3")
        ->check(CLI::IsMember({"sim2", "sim3"}));
    exp_cap->add_option("--seeds", exp_seeds, "training seeds");
    exp_cap->add_option("-k", exp_k, "recall cutoff");
    exp_cap->add_option("--seed", seed_flag, "base seed")->each([&](const std::string&) {
        seed_given = true;
    });
    exp_cap->add_option("-o,--output-dir", exp_out, "output directory");

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "prediction analyses");
    analyze->require_subcommand(1);
    std::string an_data = "data", an_baseline, an_joint, an_target = "rec";
    std::string an_out;
    int an_k = 10;
    auto add_analyze_common = [&](CLI::App* cmd, const char* default_out) {
        cmd->add_option("--data", an_data, "dataset directory")->required();
        cmd->add_option("--baseline-run", an_baseline, "task-specific run")->required();
        cmd->add_option("--joint-run", an_joint, "joint-model run")->required();
        cmd->add_option("--target-task", an_target, "rec | search")
            ->check(CLI::IsMember({"rec", "search"}));
        cmd->add_option("-o,--output", an_out, std::string("CSV path (default ") +
                                                   default_out + ")");
    };
    auto* an_pop = analyze->add_subcommand("pop", "popularity shift of predictions");
    add_analyze_common(an_pop, "table4_pop.csv");
    auto* an_latent = analyze->add_subcommand("latent", "co-occurrence contrast");
    add_analyze_common(an_latent, "table5_latent.csv");
    auto* an_red = analyze->add_subcommand("redundancy", "redundant pair analysis");
    add_analyze_common(an_red, "table6_redundancy.csv");
    an_red->add_option("-k", an_k, "recall cutoff for the improvement split");

    // ---- project ----
    auto* project_cmd = app.add_subcommand("project", "2-D embedding projection");
    std::string proj_data = "data", proj_model, proj_task = "rec";
    std::string proj_out = "fig4_projection.csv";
    project_cmd->add_option("--data", proj_data, "dataset directory")->required();
    project_cmd->add_option("--model", proj_model, "checkpoint file")->required();
    project_cmd->add_option("--profile-task", proj_task,
                            "popularity source: search | rec")
        ->check(CLI::IsMember({"search", "rec"}));
    project_cmd->add_option("-o,--output", proj_out, "CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        AppConfig config;
        if (!config_path.empty()) config = load_config(config_path);

        std::optional<std::uint64_t> env = env_seed();
        auto effective_seed = [&](std::uint64_t config_seed) {
            if (env) return *env;
            if (seed_given) return seed_flag;
            return config_seed;
        };

        CommandContext ctx(join_args(argc, argv));
        if (!config_path.empty()) ctx.add_input(config_path);

        if (simulate->parsed()) {
            if (sim1_cmd->parsed()) {
                Sim1Config cfg = config.sim1;
                if (sim1_cmd->count("--items")) cfg.num_items = sim1_cfg.num_items;
                if (sim1_cmd->count("--zipf")) cfg.zipf_exponent = sim1_cfg.zipf_exponent;
                if (sim1_cmd->count("--users")) cfg.num_users = sim1_cfg.num_users;
                if (sim1_cmd->count("--interactions"))
                    cfg.interactions_per_user = sim1_cfg.interactions_per_user;
                if (sim1_cmd->count("--queries")) cfg.num_queries = sim1_cfg.num_queries;
                if (sim1_cmd->count("--swaps")) cfg.shuffle_swaps = sim1_cfg.shuffle_swaps;
                cfg.seed = effective_seed(cfg.seed);
                json echo = {{"num_items", cfg.num_items},
                             {"zipf_exponent", cfg.zipf_exponent},
                             {"num_users", cfg.num_users},
                             {"interactions_per_user", cfg.interactions_per_user},
                             {"num_queries", cfg.num_queries},
                             {"shuffle_swaps", cfg.shuffle_swaps},
                             {"seed", cfg.seed}};
                write_sim_output(ctx, generate_sim1(cfg), sim_out, echo);
            } else if (sim2_cmd->parsed()) {
                Sim2Config cfg = config.sim2;
                if (sim2_cmd->count("--clusters")) cfg.num_clusters = sim2_cfg.num_clusters;
                if (sim2_cmd->count("--items-per-cluster"))
                    cfg.items_per_cluster = sim2_cfg.items_per_cluster;
                if (sim2_cmd->count("--users")) cfg.num_users = sim2_cfg.num_users;
                if (sim2_cmd->count("--interactions"))
                    cfg.interactions_per_user = sim2_cfg.interactions_per_user;
                if (sim2_cmd->count("--queries-per-cluster"))
                    cfg.queries_per_cluster = sim2_cfg.queries_per_cluster;
                if (sim2_cmd->count("--query-match"))
                    cfg.query_match_pct = sim2_cfg.query_match_pct;
                if (sim2_cmd->count("--sample")) cfg.sample_fraction = sim2_cfg.sample_fraction;
                cfg.seed = effective_seed(cfg.seed);
                json echo = {{"num_clusters", cfg.num_clusters},
                             {"items_per_cluster", cfg.items_per_cluster},
                             {"num_users", cfg.num_users},
                             {"interactions_per_user", cfg.interactions_per_user},
                             {"queries_per_cluster", cfg.queries_per_cluster},
                             {"query_match_pct", cfg.query_match_pct},
                             {"sample_fraction", cfg.sample_fraction},
                             {"seed", cfg.seed}};
                write_sim_output(ctx, generate_sim2(cfg), sim_out, echo);
            } else {
                Sim3Config cfg = config.sim3;
                if (sim3_cmd->count("--topics")) cfg.num_topics = sim3_cfg.num_topics;
                if (sim3_cmd->count("--paraphrases"))
                    cfg.paraphrases_per_topic = sim3_cfg.paraphrases_per_topic;
                if (sim3_cmd->count("--relevant-per-topic"))
                    cfg.relevant_items_per_topic = sim3_cfg.relevant_items_per_topic;
                if (sim3_cmd->count("--pairs-in-qrels"))
                    cfg.pairs_in_qrels_pct = sim3_cfg.pairs_in_qrels_pct;
                if (sim3_cmd->count("--users")) cfg.num_users = sim3_cfg.num_users;
                if (sim3_cmd->count("--interactions"))
                    cfg.interactions_per_user = sim3_cfg.interactions_per_user;
                if (!topics_file.empty()) {
                    std::ifstream topics_in{fs::path(topics_file)};
                    if (!topics_in) {
                        throw std::invalid_argument("cannot open topics file: " + topics_file);
                    }
                    json topics = json::parse(topics_in);
                    cfg.custom_topics =
                        topics.get<std::vector<std::vector<std::string>>>();
                    ctx.add_input(topics_file);
                }
                cfg.seed = effective_seed(cfg.seed);
                json echo = {{"num_topics", cfg.num_topics},
                             {"paraphrases_per_topic", cfg.paraphrases_per_topic},
                             {"relevant_items_per_topic", cfg.relevant_items_per_topic},
                             {"pairs_in_qrels_pct", cfg.pairs_in_qrels_pct},
                             {"num_users", cfg.num_users},
                             {"interactions_per_user", cfg.interactions_per_user},
                             {"seed", cfg.seed}};
                write_sim_output(ctx, generate_sim3(cfg), sim_out, echo);
            }
        } else if (train_cmd->parsed()) {
            RetrieverConfig cfg = config.retriever;
            if (train_cmd->count("--dim")) cfg.embedding_dim = train_config.embedding_dim;
            if (train_cmd->count("--lr")) cfg.learning_rate = train_config.learning_rate;
            if (train_cmd->count("--weight-decay"))
                cfg.weight_decay = train_config.weight_decay;
            if (train_cmd->count("--batch")) cfg.batch_size = train_config.batch_size;
            if (train_cmd->count("--epochs")) cfg.epochs = train_config.epochs;
            if (train_untied) cfg.tie_output_embeddings = false;
            cfg.seed = effective_seed(cfg.seed);
            cfg.validate();
            run_train(ctx, train_mode, train_data, cfg, train_out);
        } else if (retrieve_cmd->parsed()) {
            run_retrieve(ctx, retrieve_data, retrieve_model, retrieve_task, retrieve_split,
                         retrieve_k, retrieve_beam, config.beam, retrieve_out, qrels_out);
        } else if (evaluate_cmd->parsed()) {
            run_evaluate(ctx, eval_run, eval_qrels, eval_k, eval_baseline, eval_data,
                         eval_bucket_task, eval_out);
        } else if (stats_cmd->parsed()) {
            run_stats(ctx, stats_data, stats_out);
        } else if (experiment->parsed()) {
            std::string family = exp_sim1->parsed()   ? "sim1"
                                 : exp_sim2->parsed() ? "sim2"
                                 : exp_sim3->parsed() ? "sim3"
                                                      : cap_family;
            AppConfig exp_config = experiment_base_config(family);
            if (!config_path.empty()) exp_config = load_config(config_path, exp_config);
            if (exp_sim1->parsed()) {
                Sim1ExperimentSpec spec;
                spec.base = exp_config.sim1;
                spec.base.seed = effective_seed(spec.base.seed);
                spec.swap_levels = exp_swap_levels;
                spec.num_seeds = exp_seeds;
                spec.recall_k = exp_k;
                spec.retriever = exp_config.retriever;
                run_experiment_sim1(ctx, spec, exp_out);
            } else if (exp_sim2->parsed()) {
                Sim2ExperimentSpec spec;
                spec.base = exp_config.sim2;
                spec.base.seed = effective_seed(spec.base.seed);
                spec.match_levels = exp_match_levels;
                spec.sample_fractions = exp_samples;
                spec.num_seeds = exp_seeds;
                spec.recall_k = exp_k;
                spec.retriever = exp_config.retriever;
                run_experiment_sim2(ctx, spec, exp_out);
            } else if (exp_sim3->parsed()) {
                Sim3ExperimentSpec spec;
                spec.base = exp_config.sim3;
                spec.base.seed = effective_seed(spec.base.seed);
                spec.pair_levels = exp_pair_levels;
                spec.num_seeds = exp_seeds;
                spec.recall_k = exp_k;
                spec.retriever = exp_config.retriever;
                run_experiment_sim3(ctx, spec, exp_out);
            } else {
                CapAblationSpec spec;
                spec.family = (cap_family == "sim2") ? CapFamily::Sim2 : CapFamily::Sim3;
                spec.sim2 = exp_config.sim2;
                spec.sim3 = exp_config.sim3;
                spec.sim2.seed = effective_seed(spec.sim2.seed);
                spec.sim3.seed = effective_seed(spec.sim3.seed);
                spec.caps = exp_caps;
                spec.num_seeds = exp_seeds;
                spec.recall_k = exp_k;
                spec.retriever = exp_config.retriever;
                run_experiment_cap(ctx, spec, exp_out);
            }
        } else if (analyze->parsed()) {
            if (an_pop->parsed()) {
                if (an_out.empty()) an_out = "table4_pop.csv";
                run_analyze_pop(ctx, an_data, an_baseline, an_joint, an_target, an_out);
            } else if (an_latent->parsed()) {
                if (an_out.empty()) an_out = "table5_latent.csv";
                run_analyze_latent(ctx, an_data, an_baseline, an_joint, an_target, an_out);
            } else {
                if (an_out.empty()) an_out = "table6_redundancy.csv";
                run_analyze_redundancy(ctx, an_data, an_baseline, an_joint, an_target, an_k,
                                       an_out);
            }
        } else if (project_cmd->parsed()) {
            run_project(ctx, proj_data, proj_model, proj_task, proj_out);
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
