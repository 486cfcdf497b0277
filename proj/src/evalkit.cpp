#include "genir/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace genir {

int BucketAssignment::head_size() const {
    int n = 0;
    for (Bucket b : bucket) n += (b == Bucket::Head) ? 1 : 0;
    return n;
}

double recall_at_k(const RankedList& prediction, const std::vector<ItemId>& relevance,
                   int k) {
    if (k < 1) throw std::invalid_argument("recall_at_k: k must be >= 1");
    if (relevance.empty()) throw std::invalid_argument("recall_at_k: empty relevance set");
    std::unordered_set<ItemId> relevant(relevance.begin(), relevance.end());
    int hits = 0;
    int considered = 0;
    for (const auto& entry : prediction.entries) {
        if (considered++ >= k) break;
        if (relevant.count(entry.item)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

BucketAssignment head_torso_buckets(const std::vector<double>& train_counts) {
    const int n = static_cast<int>(train_counts.size());
    if (n == 0) throw std::invalid_argument("head_torso_buckets: empty counts");
    int head_size = static_cast<int>(std::ceil(0.01 * static_cast<double>(n)));
    head_size = std::max(1, std::min(head_size, n));
    std::vector<ItemId> ids(train_counts.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::partial_sort(ids.begin(), ids.begin() + head_size, ids.end(),
                      [&](ItemId a, ItemId b) {
                          double ca = train_counts[static_cast<std::size_t>(a)];
                          double cb = train_counts[static_cast<std::size_t>(b)];
                          if (ca != cb) return ca > cb;
                          return a < b;
                      });
    BucketAssignment assignment;
    assignment.bucket.assign(train_counts.size(), Bucket::Torso);
    for (int i = 0; i < head_size; ++i) {
        assignment.bucket[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])] =
            Bucket::Head;
    }
    return assignment;
}

EvalReport bucketed_evaluate(const std::vector<EvalInstance>& instances,
                             const BucketAssignment& buckets, int k) {
    EvalReport report;
    report.k = k;
    double head_sum = 0.0, torso_sum = 0.0, all_sum = 0.0;
    for (const auto& instance : instances) {
        double all = recall_at_k(instance.prediction, instance.relevance, k);
        report.instance_ids.push_back(instance.id);
        report.per_instance_recall.push_back(all);
        all_sum += all;

        std::vector<ItemId> head_rel, torso_rel;
        for (ItemId item : instance.relevance) {
            (buckets.of(item) == Bucket::Head ? head_rel : torso_rel).push_back(item);
        }
        if (!head_rel.empty()) {
            head_sum += recall_at_k(instance.prediction, head_rel, k);
            ++report.head_instances;
        }
        if (!torso_rel.empty()) {
            torso_sum += recall_at_k(instance.prediction, torso_rel, k);
            ++report.torso_instances;
        }
    }
    if (!instances.empty()) {
        report.mean_recall = all_sum / static_cast<double>(instances.size());
    }
    if (report.head_instances > 0) {
        report.head_recall = head_sum / static_cast<double>(report.head_instances);
    }
    if (report.torso_instances > 0) {
        report.torso_recall = torso_sum / static_cast<double>(report.torso_instances);
    }
    return report;
}

EvalReport evaluate(const std::vector<EvalInstance>& instances, int k) {
    EvalReport report;
    report.k = k;
    double sum = 0.0;
    for (const auto& instance : instances) {
        double r = recall_at_k(instance.prediction, instance.relevance, k);
        report.instance_ids.push_back(instance.id);
        report.per_instance_recall.push_back(r);
        sum += r;
    }
    if (!instances.empty()) {
        report.mean_recall = sum / static_cast<double>(instances.size());
    }
    return report;
}

RankedList pop_baseline(const std::vector<double>& train_counts, int k) {
    if (train_counts.empty()) throw std::invalid_argument("pop_baseline: empty counts");
    double total = std::accumulate(train_counts.begin(), train_counts.end(), 0.0);
    if (total <= 0.0) throw std::invalid_argument("pop_baseline: all counts are zero");
    const int n = static_cast<int>(train_counts.size());
    const int limit = std::min(k, n);
    std::vector<ItemId> ids(train_counts.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::partial_sort(ids.begin(), ids.begin() + limit, ids.end(),
                      [&](ItemId a, ItemId b) {
                          double ca = train_counts[static_cast<std::size_t>(a)];
                          double cb = train_counts[static_cast<std::size_t>(b)];
                          if (ca != cb) return ca > cb;
                          return a < b;
                      });
    RankedList list;
    list.k = k;
    for (int i = 0; i < limit; ++i) {
        ItemId item = ids[static_cast<std::size_t>(i)];
        double p = (train_counts[static_cast<std::size_t>(item)] + 1e-9) / (total + 1e-9 * n);
        list.entries.push_back({item, std::log(p)});
    }
    return list;
}

namespace {

// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double incomplete_beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-14;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * incomplete_beta_cf(a, b, x) / a;
    }
    return 1.0 - front * incomplete_beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_p_value(double t, int degrees_of_freedom) {
    if (degrees_of_freedom < 1) {
        throw std::invalid_argument("student_t_p_value: df must be >= 1");
    }
    double df = static_cast<double>(degrees_of_freedom);
    double x = df / (df + t * t);
    return incomplete_beta(0.5 * df, 0.5, x);
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b,
                          double alpha) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("paired_t_test: length mismatch");
    }
    if (a.size() < 2) {
        throw std::invalid_argument("paired_t_test: need at least 2 pairs");
    }
    const std::size_t n = a.size();
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
    double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double d : diff) ss += (d - mean) * (d - mean);
    double var = ss / static_cast<double>(n - 1);

    TTestResult result;
    result.mean_diff = mean;
    result.degrees_of_freedom = static_cast<int>(n) - 1;
    if (var <= 0.0) {
        result.zero_variance = true;
        result.t_statistic = 0.0;
        result.p_value = (mean == 0.0) ? 1.0 : 0.0;
        result.significant_at_95 = (mean != 0.0);
        return result;
    }
    result.t_statistic = mean / std::sqrt(var / static_cast<double>(n));
    result.p_value = student_t_p_value(result.t_statistic, result.degrees_of_freedom);
    result.significant_at_95 = result.p_value < alpha;
    return result;
}

namespace {

SeedAggregate aggregate_values(const std::vector<double>& values) {
    SeedAggregate agg;
    agg.n = static_cast<int>(values.size());
    if (values.empty()) return agg;
    agg.mean = std::accumulate(values.begin(), values.end(), 0.0) /
               static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
        agg.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return agg;
}

}  // namespace

AggregatedReport aggregate_seeds(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate_seeds: no reports");
    for (const auto& r : reports) {
        if (r.k != reports.front().k) {
            throw std::invalid_argument("aggregate_seeds: reports use different K");
        }
        if (r.instance_ids != reports.front().instance_ids) {
            throw std::invalid_argument("aggregate_seeds: instance sets differ across seeds");
        }
    }
    AggregatedReport out;
    std::vector<double> all, head, torso;
    bool head_everywhere = true, torso_everywhere = true;
    for (const auto& r : reports) {
        all.push_back(r.mean_recall);
        if (r.head_recall) head.push_back(*r.head_recall); else head_everywhere = false;
        if (r.torso_recall) torso.push_back(*r.torso_recall); else torso_everywhere = false;
    }
    out.all = aggregate_values(all);
    if (head_everywhere && !head.empty()) out.head = aggregate_values(head);
    if (torso_everywhere && !torso.empty()) out.torso = aggregate_values(torso);
    return out;
}

}  // namespace genir
