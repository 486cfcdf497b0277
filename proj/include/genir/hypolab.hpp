#pragma once
// Hypothesis experiment runners (the SIM1 divergence sweep, the SIM2/SIM3
// co-occurrence tables, the per-item training cap ablation), the
// prediction-analysis metrics, and the 2-D embedding projection export.

#include <optional>
#include <string>
#include <vector>

#include "genir/decode.hpp"
#include "genir/evalkit.hpp"
#include "genir/io.hpp"
#include "genir/retriever.hpp"
#include "genir/simgen.hpp"

namespace genir {

// --- shared plumbing --------------------------------------------------------

// Per-run seeds derived from a base seed; seed i is stable across sweeps.
std::vector<std::uint64_t> experiment_seeds(std::uint64_t base_seed, int count);

// Order-preserving deterministic subsample keeping floor(fraction * n).
std::vector<TrainingInstance> subsample_fraction(
    const std::vector<TrainingInstance>& instances, double fraction,
    std::uint64_t seed);

// Keeps at most `cap` instances per target item, earliest first; a negative
// cap means unlimited (the list is returned unchanged).
std::vector<TrainingInstance> cap_per_item(const std::vector<TrainingInstance>& instances,
                                           int cap, const Vocabulary& vocab);

// Spearman rank correlation (average ranks on ties).
double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

// A trained model bundle for one (dataset, seed) cell.
struct TrainedModels {
    Vocabulary vocab;
    std::vector<TrainingInstance> search_train;
    std::vector<TrainingInstance> rec_train;
    RecSplitResult rec_splits;
    std::optional<TrainReport> gen_s;
    std::optional<TrainReport> gen_r;
    std::optional<TrainReport> gen_rs;
};

struct ModelSelection {
    bool gen_s = false;
    bool gen_r = false;
    bool gen_rs = true;
};

// Builds instances from a simulated pair, applies the sample fraction of the
// target task when requested, optionally caps the added task's instances per
// target item (negative = unlimited), and trains the selected models.
TrainedModels train_models(const SimOutput& sim, const RetrieverConfig& base_config,
                           std::uint64_t seed, const ModelSelection& selection,
                           double target_sample_fraction = 1.0,
                           Task target_task = Task::Rec, int added_task_cap = -1);

// Evaluation cases. Rec cases whose target item never appears as a training
// target are dropped, mirroring the all-test-items-in-train guarantee.
struct RecTestCase {
    std::string id;
    std::vector<ItemId> history;
    ItemId target;
    std::vector<TokenIndex> input;
};
struct SearchTestCase {
    std::string id;
    std::vector<ItemId> relevance;
    std::vector<TokenIndex> input;
};
std::vector<RecTestCase> rec_eval_cases(const RecDataset& rec, const Vocabulary& vocab,
                                        Split split,
                                        const std::vector<TrainingInstance>& target_train);
std::vector<SearchTestCase> search_eval_cases(const SearchDataset& search,
                                              const Vocabulary& vocab, Split split);

// --- experiment runners ------------------------------------------------------

struct Sim1ExperimentSpec {
    Sim1Config base;
    std::vector<int> swap_levels = {0, 1, 2, 4, 8};
    int num_seeds = 5;
    int recall_k = 10;
    RetrieverConfig retriever;
};

struct SweepCell {
    double level = 0.0;        // swept value (swaps / match pct / pairs pct / cap)
    std::string model;         // "gen_s" | "gen_r" | "gen_rs"
    double mean_recall = 0.0;
    double std_recall = 0.0;
    std::optional<double> p_value_vs_specific;
    double level_detail = 0.0;  // achieved KLD / achieved pairs pct / instances kept
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<std::string> notes;
};

// Divergence sweep (fig3_sim1.csv): per swap level, mean R@K of the joint
// and task-specific models against the achieved KLD.
SweepResult run_sim1_experiment(const Sim1ExperimentSpec& spec);

struct Sim2ExperimentSpec {
    Sim2Config base;
    std::vector<double> match_levels = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> sample_fractions = {1.0};
    int num_seeds = 5;
    int recall_k = 10;
    RetrieverConfig retriever;
};

// Query-match sweep (table3_sim2.csv), S -> R direction; p-values pair
// per-seed means of the joint model against the rec-only model.
SweepResult run_sim2_experiment(const Sim2ExperimentSpec& spec);

struct Sim3ExperimentSpec {
    Sim3Config base;
    std::vector<double> pair_levels = {0.0, 0.25, 0.5, 0.75, 1.0};
    int num_seeds = 5;
    int recall_k = 10;
    RetrieverConfig retriever;
};

// Pair-alignment sweep (table3_sim3.csv), R -> S direction.
SweepResult run_sim3_experiment(const Sim3ExperimentSpec& spec);

enum class CapFamily { Sim2, Sim3 };

struct CapAblationSpec {
    CapFamily family = CapFamily::Sim2;
    Sim2Config sim2;
    Sim3Config sim3;
    std::vector<int> caps = {0, 1, 2, 4, 8, -1};  // -1 = uncapped
    int num_seeds = 5;
    int recall_k = 10;
    RetrieverConfig retriever;
};

// Cap sweep (fig5_cap.csv): joint training with the added task's
// instances capped per target item.
SweepResult run_cap_ablation(const CapAblationSpec& spec);

// --- prediction analyses -------------------------------------------------

struct DeltaResult {
    double baseline_mean = 0.0;
    double joint_mean = 0.0;
    std::optional<double> percent_change;  // absent when the baseline mean is 0
    int instances = 0;
};

// Percent change in mean other-task popularity of the predicted items,
// computed over all instances (runs must cover identical ids in order).
DeltaResult delta_popularity(const std::vector<RunEntry>& baseline,
                             const std::vector<RunEntry>& joint,
                             const PopularityProfile& other_task_profile);

// Contrast of a per-instance statistic between the instances where the two
// runs disagree and the full population (plus the agreeing complement).
struct SubsetContrast {
    std::optional<double> differing_mean;
    std::optional<double> agreeing_mean;
    double overall_mean = 0.0;
    std::optional<double> pct_change_vs_all;
    std::optional<double> pct_change_vs_agreeing;
    int differing_instances = 0;
    int total_instances = 0;
};

// Per rec instance: over distinct history items i, the number of unique
// train queries whose relevance set contains both i and the target.
SubsetContrast history_target_query_matches(const std::vector<RecTestCase>& cases,
                                            const SearchDataset& search_train,
                                            const std::vector<RunEntry>& baseline,
                                            const std::vector<RunEntry>& joint);

// Per search query: mean over unordered relevant-item pairs of the number of
// rec training histories containing both items (singleton sets excluded).
SubsetContrast rel_pair_cooccurrence(const std::vector<SearchTestCase>& cases,
                                     const RecDataset& rec_train,
                                     const std::vector<RunEntry>& baseline,
                                     const std::vector<RunEntry>& joint);

// --- redundancy ------------------------------------------------------------

struct RedundancyReport {
    long long redundant_pairs = 0;
    long long non_redundant_pairs = 0;
    int redundant_instances = 0;
    int non_redundant_instances = 0;
    std::optional<double> redundant_improvement_pct;
    std::optional<double> non_redundant_improvement_pct;
};

// Pairs from rec test instances ({history item, target}), classified by
// presence in the two training sources. Target task: recommendation.
RedundancyReport redundancy_analysis_rec(const std::vector<RecTestCase>& cases,
                                         const RecDataset& rec_train,
                                         const SearchDataset& search_train,
                                         const std::vector<RunEntry>& baseline,
                                         const std::vector<RunEntry>& joint, int k);

// Pairs within search test relevance sets. Target task: search.
RedundancyReport redundancy_analysis_search(const std::vector<SearchTestCase>& cases,
                                            const RecDataset& rec_train,
                                            const SearchDataset& search_train,
                                            const std::vector<RunEntry>& baseline,
                                            const std::vector<RunEntry>& joint, int k);

// --- projection -------------------------------------------------------------

struct ProjectedItem {
    ItemId item = 0;
    double x = 0.0;
    double y = 0.0;
    double popularity = 0.0;
    std::optional<int> cluster;
};

struct ProjectionResult {
    std::vector<ProjectedItem> points;
    bool second_axis_degenerate = false;
};

// Centered 2-D PCA of the item embeddings via deterministic power iteration;
// popularity shading from the profile, cluster labels when provided.
ProjectionResult project_embeddings(const RetrieverParams& params,
                                    const PopularityProfile& profile,
                                    const std::vector<int>& cluster_of_item = {});

}  // namespace genir
