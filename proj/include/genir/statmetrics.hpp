#pragma once
// Distribution statistics: KL divergence, Kolmogorov distance over the
// item-id-ordered CDFs, Gini concentration index, popularity profiles, and
// the dataset summary block.

#include <map>
#include <string>
#include <vector>

#include "genir/corpus.hpp"

namespace genir {

struct PopularityDistribution {
    std::vector<double> probs;  // >= 0, sums to 1 within 1e-12

    int size() const { return static_cast<int>(probs.size()); }
};

// Normalizes nonnegative weights; throws if the sum is not positive.
PopularityDistribution normalize_distribution(std::vector<double> weights);

enum class ProfileSource { SearchTrain, RecTrain, Predictions };

struct PopularityProfile {
    std::vector<double> counts;  // per item
    PopularityDistribution distribution;  // additive smoothing eps=1e-9
    ProfileSource source = ProfileSource::RecTrain;

    double count(ItemId item) const {
        return counts[static_cast<std::size_t>(item)];
    }
};

PopularityProfile profile_from_counts(std::vector<double> counts,
                                      ProfileSource source);

// Search counts: (query, item) relevance memberships over the given split.
PopularityProfile popularity_profile(const SearchDataset& data,
                                     Split split = Split::Train);
// Rec counts: interaction occurrences. When train_only is set, the last two
// interactions of each user (the validation/test targets) are excluded.
PopularityProfile popularity_profile(const RecDataset& data,
                                     bool train_only = false);
// Prediction counts: retrieved-list memberships of a run.
PopularityProfile profile_from_predictions(
    const std::vector<std::vector<ItemId>>& ranked_lists, int num_items);

// sum p_i ln(p_i / q_i), in nats; terms with p_i = 0 contribute 0.
// Throws on support mismatch or a nonpositive q_i under a positive p_i.
double kl_divergence(const PopularityDistribution& p,
                     const PopularityDistribution& q);

// max_i |CDF_p(i) - CDF_q(i)| over the ascending-ItemId support.
double ks_distance(const PopularityDistribution& p,
                   const PopularityDistribution& q);

// Mean-absolute-difference Gini: sum_ij |x_i - x_j| / (2 n sum x).
// Throws if all counts are zero or any count is negative.
double gini_index(const std::vector<double>& counts);

struct DatasetStats {
    int num_items = 0;
    int num_users = 0;
    int num_queries = 0;
    double density = 0.0;          // interactions / (users * items)
    double avg_rel_per_query = 0.0;
    double gini_search = 0.0;
    double gini_rec = 0.0;
    double ks_dist = 0.0;
    double kld_sr = 0.0;  // KLD(search || rec)
    double kld_rs = 0.0;  // KLD(rec || search)
};

// Popularity statistics are computed over the training portions of both
// datasets; density and counts cover the full data.
DatasetStats dataset_stats(const SearchDataset& search, const RecDataset& rec);

}  // namespace genir
