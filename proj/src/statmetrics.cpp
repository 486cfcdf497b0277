#include "genir/statmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace genir {

namespace {
constexpr double kSmoothingEps = 1e-9;
}

PopularityDistribution normalize_distribution(std::vector<double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw std::invalid_argument("distribution weights must be finite and nonnegative");
        }
        sum += w;
    }
    if (sum <= 0.0) {
        throw std::invalid_argument("distribution weights must not all be zero");
    }
    for (double& w : weights) w /= sum;
    return PopularityDistribution{std::move(weights)};
}

PopularityProfile profile_from_counts(std::vector<double> counts,
                                      ProfileSource source) {
    std::vector<double> smoothed = counts;
    for (double& c : smoothed) c += kSmoothingEps;
    PopularityProfile profile;
    profile.counts = std::move(counts);
    profile.distribution = normalize_distribution(std::move(smoothed));
    profile.source = source;
    return profile;
}

PopularityProfile popularity_profile(const SearchDataset& data, Split split) {
    std::vector<double> counts(static_cast<std::size_t>(data.num_items), 0.0);
    for (const auto& record : data.records) {
        if (record.split != split) continue;
        for (ItemId item : record.relevant) {
            counts.at(static_cast<std::size_t>(item)) += 1.0;
        }
    }
    return profile_from_counts(std::move(counts), ProfileSource::SearchTrain);
}

PopularityProfile popularity_profile(const RecDataset& data, bool train_only) {
    std::vector<double> counts(static_cast<std::size_t>(data.num_items), 0.0);
    for (const auto& user : data.users) {
        std::size_t limit = user.interactions.size();
        if (train_only && limit >= 2) limit -= 2;
        for (std::size_t i = 0; i < limit; ++i) {
            counts.at(static_cast<std::size_t>(user.interactions[i])) += 1.0;
        }
    }
    return profile_from_counts(std::move(counts), ProfileSource::RecTrain);
}

PopularityProfile profile_from_predictions(
    const std::vector<std::vector<ItemId>>& ranked_lists, int num_items) {
    std::vector<double> counts(static_cast<std::size_t>(num_items), 0.0);
    for (const auto& list : ranked_lists) {
        for (ItemId item : list) {
            counts.at(static_cast<std::size_t>(item)) += 1.0;
        }
    }
    return profile_from_counts(std::move(counts), ProfileSource::Predictions);
}

double kl_divergence(const PopularityDistribution& p,
                     const PopularityDistribution& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("kl_divergence: support mismatch");
    }
    double sum = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        double pi = p.probs[static_cast<std::size_t>(i)];
        if (pi == 0.0) continue;
        double qi = q.probs[static_cast<std::size_t>(i)];
        if (qi <= 0.0) {
            throw std::invalid_argument(
                "kl_divergence: q must be strictly positive where p is");
        }
        sum += pi * std::log(pi / qi);
    }
    return sum;
}

double ks_distance(const PopularityDistribution& p,
                   const PopularityDistribution& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("ks_distance: support mismatch");
    }
    double cdf_p = 0.0, cdf_q = 0.0, max_gap = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        cdf_p += p.probs[static_cast<std::size_t>(i)];
        cdf_q += q.probs[static_cast<std::size_t>(i)];
        max_gap = std::max(max_gap, std::abs(cdf_p - cdf_q));
    }
    return max_gap;
}

double gini_index(const std::vector<double>& counts) {
    if (counts.empty()) {
        throw std::invalid_argument("gini_index: empty input");
    }
    double total = 0.0;
    for (double c : counts) {
        if (c < 0.0 || !std::isfinite(c)) {
            throw std::invalid_argument("gini_index: counts must be finite and nonnegative");
        }
        total += c;
    }
    if (total <= 0.0) {
        throw std::invalid_argument("gini_index: all counts are zero");
    }
    // sum_ij |x_i - x_j| via sorted prefix sums: for sorted x,
    // sum_ij |x_i - x_j| = 2 * sum_i (i * x_i - prefix_{i-1}).
    std::vector<double> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double prefix = 0.0, abs_diff_sum = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        abs_diff_sum += 2.0 * (static_cast<double>(i) * sorted[i] - prefix);
        prefix += sorted[i];
    }
    return abs_diff_sum / (2.0 * n * total);
}

DatasetStats dataset_stats(const SearchDataset& search, const RecDataset& rec) {
    DatasetStats stats;
    stats.num_items = std::max(search.num_items, rec.num_items);
    stats.num_users = static_cast<int>(rec.users.size());

    long long interactions = 0;
    for (const auto& user : rec.users) {
        interactions += static_cast<long long>(user.interactions.size());
    }
    if (stats.num_users > 0 && stats.num_items > 0) {
        stats.density = static_cast<double>(interactions) /
                        (static_cast<double>(stats.num_users) *
                         static_cast<double>(stats.num_items));
    }

    long long rel_total = 0;
    for (const auto& record : search.records) {
        ++stats.num_queries;
        rel_total += static_cast<long long>(record.relevant.size());
    }
    if (stats.num_queries > 0) {
        stats.avg_rel_per_query =
            static_cast<double>(rel_total) / static_cast<double>(stats.num_queries);
    }

    PopularityProfile sp = popularity_profile(search, Split::Train);
    PopularityProfile rp = popularity_profile(rec, /*train_only=*/true);
    stats.gini_search = gini_index(sp.counts);
    stats.gini_rec = gini_index(rp.counts);
    stats.ks_dist = ks_distance(sp.distribution, rp.distribution);
    stats.kld_sr = kl_divergence(sp.distribution, rp.distribution);
    stats.kld_rs = kl_divergence(rp.distribution, sp.distribution);
    return stats;
}

}  // namespace genir
