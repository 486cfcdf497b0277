#pragma once
// Recall-oriented evaluation: R@K, Head/Torso bucketing over train
// popularity, the constant popularity baseline, paired t-tests, and
// multi-seed aggregation.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genir/decode.hpp"
#include "genir/statmetrics.hpp"

namespace genir {

struct EvalInstance {
    std::string id;
    Task task = Task::Rec;
    std::vector<ItemId> relevance;  // nonempty; singleton for Rec
    RankedList prediction;
};

enum class Bucket { Head, Torso };

struct BucketAssignment {
    std::vector<Bucket> bucket;  // per item

    Bucket of(ItemId item) const { return bucket[static_cast<std::size_t>(item)]; }
    int head_size() const;
};

struct EvalReport {
    int k = 0;
    std::vector<std::string> instance_ids;
    std::vector<double> per_instance_recall;
    double mean_recall = 0.0;
    std::optional<double> head_recall;   // absent when the bucket gets no instances
    std::optional<double> torso_recall;
    int head_instances = 0;
    int torso_instances = 0;
};

struct TTestResult {
    double mean_diff = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;
    int degrees_of_freedom = 0;
    bool significant_at_95 = false;
    bool zero_variance = false;
};

struct SeedAggregate {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, divisor n-1
    int n = 0;
};

struct AggregatedReport {
    SeedAggregate all;
    std::optional<SeedAggregate> head;
    std::optional<SeedAggregate> torso;
};

// |top-K of prediction ∩ relevance| / |relevance|. Throws on empty relevance.
double recall_at_k(const RankedList& prediction, const std::vector<ItemId>& relevance,
                   int k);

// Head = ceil(0.01 * num_items) most frequent items, ties by ascending id.
BucketAssignment head_torso_buckets(const std::vector<double>& train_counts);

// Head/Torso recalls restrict the relevance set to the bucket; instances
// whose restricted relevance is empty are excluded from that bucket.
EvalReport bucketed_evaluate(const std::vector<EvalInstance>& instances,
                             const BucketAssignment& buckets, int k);

// Plain evaluation without buckets (All metric only).
EvalReport evaluate(const std::vector<EvalInstance>& instances, int k);

// Constant ranked list of the K most frequent training items.
RankedList pop_baseline(const std::vector<double>& train_counts, int k);

// Two-sided paired Student's t-test on a - b. Zero-variance differences:
// p = 0 when the mean is nonzero, p = 1 otherwise (flagged).
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b,
                          double alpha = 0.05);

// Student-t two-sided p-value, exposed for reuse by the experiment runners.
double student_t_p_value(double t, int degrees_of_freedom);

// Mean and sample standard deviation per metric across seeds. Throws when
// the reports cover different K or instance sets.
AggregatedReport aggregate_seeds(const std::vector<EvalReport>& reports);

}  // namespace genir
