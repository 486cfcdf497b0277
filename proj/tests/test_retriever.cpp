#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "genir/corpus.hpp"
#include "genir/retriever.hpp"
#include "genir/rng.hpp"
#include "genir/simgen.hpp"

using namespace genir;

namespace {

Vocabulary tiny_vocab(int num_items, int num_words) {
    SearchDataset search;
    search.num_items = num_items;
    std::string query;
    for (int w = 0; w < num_words; ++w) query += "w" + std::to_string(w) + " ";
    if (num_words > 0) search.records.push_back({query, {0}, Split::Train});
    RecDataset rec;
    rec.num_items = num_items;
    return build_vocabulary(search, rec);
}

RetrieverParams random_params(const Vocabulary& vocab, int dim, bool tied,
                              std::uint64_t seed) {
    RetrieverConfig cfg;
    cfg.embedding_dim = dim;
    cfg.tie_output_embeddings = tied;
    cfg.seed = seed;
    RetrieverParams params = init_params(cfg, vocab);
    auto rng = make_rng(seed, "bias_init");
    std::normal_distribution<double> normal(0.0, 0.5);
    for (double& b : params.item_bias) b = normal(rng);
    return params;
}

double batch_loss(const RetrieverParams& params,
                  const std::vector<TrainingInstance>& batch) {
    double loss = 0.0;
    for (const auto& inst : batch) {
        auto probs = forward(params, inst.input);
        loss -= std::log(probs[static_cast<std::size_t>(inst.target - params.item_token_offset)]);
    }
    return loss / static_cast<double>(batch.size());
}

// central finite differences over every parameter
double max_relative_gradient_error(RetrieverParams params,
                                   const std::vector<TrainingInstance>& batch) {
    ParamGradient grad(params);
    loss_and_gradient(params, batch, grad);
    const double h = 1e-3;
    double worst = 0.0;
    auto probe = [&](std::vector<double>& values, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            double saved = values[i];
            values[i] = saved + h;
            double up = batch_loss(params, batch);
            values[i] = saved - h;
            double down = batch_loss(params, batch);
            values[i] = saved;
            double numeric = (up - down) / (2.0 * h);
            double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
            worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
        }
    };
    probe(params.input_embeddings, grad.input_embeddings);
    if (!params.tied) probe(params.output_embeddings, grad.output_embeddings);
    probe(params.item_bias, grad.item_bias);
    return worst;
}

std::vector<TrainingInstance> random_batch(const Vocabulary& vocab, std::mt19937_64& rng,
                                           int size) {
    std::vector<TrainingInstance> batch;
    for (int b = 0; b < size; ++b) {
        TrainingInstance inst;
        int len = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < len; ++i) {
            inst.input.push_back(static_cast<TokenIndex>(rng() % vocab.size()));
        }
        inst.target = vocab.item_token(static_cast<ItemId>(rng() % vocab.num_items()));
        inst.task = (rng() % 2) ? Task::Rec : Task::Search;
        batch.push_back(std::move(inst));
    }
    return batch;
}

}  // namespace

TEST_CASE("forward with zero embeddings and uniform bias is uniform") {
    auto vocab = tiny_vocab(4, 2);
    RetrieverConfig cfg;
    cfg.embedding_dim = 8;
    auto params = init_params(cfg, vocab);
    std::fill(params.input_embeddings.begin(), params.input_embeddings.end(), 0.0);
    auto probs = forward(params, std::vector<TokenIndex>{0, 1});
    for (double p : probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("forward softmax of the bias alone") {
    auto vocab = tiny_vocab(2, 1);
    RetrieverConfig cfg;
    auto params = init_params(cfg, vocab);
    std::fill(params.input_embeddings.begin(), params.input_embeddings.end(), 0.0);
    params.item_bias = {std::log(2.0), 0.0};
    auto probs = forward(params, std::vector<TokenIndex>{0});
    CHECK(probs[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("forward is order-invariant and always a distribution") {
    auto vocab = tiny_vocab(6, 4);
    auto params = random_params(vocab, 16, true, 42);
    std::vector<TokenIndex> input = {0, 3, 5, 1};
    auto a = forward(params, input);
    std::reverse(input.begin(), input.end());
    auto b = forward(params, input);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
    double total = std::accumulate(a.begin(), a.end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-9);
    for (double p : a) CHECK(p >= 0.0);
}

TEST_CASE("forward rejects empty input") {
    auto vocab = tiny_vocab(3, 1);
    auto params = init_params(RetrieverConfig{}, vocab);
    CHECK_THROWS_AS(forward(params, std::vector<TokenIndex>{}), std::invalid_argument);
}

TEST_CASE("zero parameters give log(n) loss") {
    auto vocab = tiny_vocab(7, 2);
    RetrieverConfig cfg;
    auto params = init_params(cfg, vocab);
    std::fill(params.input_embeddings.begin(), params.input_embeddings.end(), 0.0);
    ParamGradient grad(params);
    std::vector<TrainingInstance> batch = {
        {{0, 1}, vocab.item_token(3), Task::Search}};
    CHECK(loss_and_gradient(params, batch, grad) ==
          doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("duplicating the batch leaves loss and gradient unchanged") {
    auto vocab = tiny_vocab(5, 3);
    auto params = random_params(vocab, 8, true, 9);
    std::vector<TrainingInstance> batch = {
        {{0, 2}, vocab.item_token(1), Task::Search},
        {{vocab.item_token(0)}, vocab.item_token(4), Task::Rec}};
    ParamGradient grad(params);
    double loss = loss_and_gradient(params, batch, grad);
    auto doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    ParamGradient grad2(params);
    double loss2 = loss_and_gradient(params, doubled, grad2);
    CHECK(loss == doctest::Approx(loss2).epsilon(1e-12));
    for (std::size_t i = 0; i < grad.input_embeddings.size(); ++i) {
        CHECK(grad.input_embeddings[i] ==
              doctest::Approx(grad2.input_embeddings[i]).epsilon(1e-9));
    }
}

TEST_CASE("target outside the item range is an error") {
    auto vocab = tiny_vocab(3, 1);
    auto params = init_params(RetrieverConfig{}, vocab);
    ParamGradient grad(params);
    std::vector<TrainingInstance> batch = {{{0}, Vocabulary::kPad, Task::Search}};
    CHECK_THROWS_AS(loss_and_gradient(params, batch, grad), std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
    auto rng = make_rng(1234, "grad_check");
    for (int it = 0; it < 20; ++it) {
        bool tied = (it % 2 == 0);
        int num_items = 3 + static_cast<int>(rng() % 4);
        int num_words = 2 + static_cast<int>(rng() % 3);
        int dim = 3 + static_cast<int>(rng() % 4);
        auto vocab = tiny_vocab(num_items, num_words);
        auto params = random_params(vocab, dim, tied, rng());
        auto batch = random_batch(vocab, rng, 1 + static_cast<int>(rng() % 5));
        CHECK(max_relative_gradient_error(params, batch) < 1e-4);
    }
}

TEST_CASE("weight decay is decoupled from the adaptive step") {
    auto vocab = tiny_vocab(4, 2);
    auto params = random_params(vocab, 6, true, 77);

    SUBCASE("lr=0 with decay: gradients contribute nothing") {
        AdamW opt(params, /*learning_rate=*/0.0, /*weight_decay=*/0.5);
        ParamGradient grad(params);
        for (double& g : grad.input_embeddings) g = 1.0;
        for (double& g : grad.item_bias) g = -2.0;
        auto before = params;
        opt.step(params, grad);
        CHECK(params.input_embeddings == before.input_embeddings);
        CHECK(params.item_bias == before.item_bias);
    }

    SUBCASE("zero gradient: embeddings shrink by exactly (1 - lr*wd) per step") {
        const double lr = 0.01, wd = 0.5;
        AdamW opt(params, lr, wd);
        ParamGradient grad(params);  // all zeros
        auto initial = params;
        const int steps = 7;
        for (int s = 0; s < steps; ++s) opt.step(params, grad);
        double factor = std::pow(1.0 - lr * wd, steps);
        for (std::size_t i = 0; i < params.input_embeddings.size(); ++i) {
            CHECK(params.input_embeddings[i] ==
                  doctest::Approx(initial.input_embeddings[i] * factor).epsilon(1e-12));
        }
        // biases are exempt from decay
        CHECK(params.item_bias == initial.item_bias);
    }
}

TEST_CASE("training is deterministic per seed") {
    Sim2Config data_cfg;
    data_cfg.num_users = 40;
    data_cfg.seed = 8;
    auto sim = generate_sim2(data_cfg);
    auto vocab = build_vocabulary(sim.search, sim.rec);
    auto instances = rec_split(sim.rec, vocab).train;

    RetrieverConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 31;
    auto a = train(cfg, instances, vocab);
    auto b = train(cfg, instances, vocab);
    CHECK(a.params.input_embeddings == b.params.input_embeddings);
    CHECK(a.params.item_bias == b.params.item_bias);
    CHECK(a.epoch_losses == b.epoch_losses);

    cfg.seed = 32;
    auto c = train(cfg, instances, vocab);
    CHECK_FALSE(a.params.input_embeddings == c.params.input_embeddings);
}

TEST_CASE("training loss decreases from the first to the last epoch") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Sim1Config data_cfg;
        data_cfg.num_users = 60;
        data_cfg.seed = seed;
        auto sim = generate_sim1(data_cfg);
        auto vocab = build_vocabulary(sim.search, sim.rec);
        auto instances = rec_split(sim.rec, vocab).train;
        RetrieverConfig cfg;
        cfg.seed = seed;
        auto report = train(cfg, instances, vocab);
        REQUIRE(report.epoch_losses.size() == 5);
        CHECK(report.epoch_losses.back() < report.epoch_losses.front());
    }
}

TEST_CASE("zero epochs returns the seeded initialization") {
    auto vocab = tiny_vocab(4, 2);
    RetrieverConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 5;
    std::vector<TrainingInstance> instances = {{{0}, vocab.item_token(0), Task::Search}};
    auto report = train(cfg, instances, vocab);
    auto fresh = init_params(cfg, vocab);
    CHECK(report.params.input_embeddings == fresh.input_embeddings);
    CHECK(report.params.item_bias == fresh.item_bias);
}

TEST_CASE("item embedding aliases the input row in tied mode") {
    auto vocab = tiny_vocab(5, 2);
    RetrieverConfig cfg;
    cfg.tie_output_embeddings = true;
    auto params = init_params(cfg, vocab);
    for (ItemId i = 0; i < 5; ++i) {
        auto row = params.input_row(vocab.item_token(i));
        auto emb = item_embedding(params, i);
        CHECK(std::equal(emb.begin(), emb.end(), row.begin()));
    }

    cfg.tie_output_embeddings = false;
    auto untied = init_params(cfg, vocab);
    auto emb = item_embedding(untied, 2);
    auto out_row = untied.output_row(2);
    CHECK(std::equal(emb.begin(), emb.end(), out_row.begin()));
}

TEST_CASE("sim1 training recovers the popularity ranking") {
    // the trained model's marginal prediction ranks items like the train
    // frequency; checked on the top 5 of 20 over 5 seeds (>= 80% overlap)
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Sim1Config data_cfg;
        data_cfg.seed = seed;  // defaults: 20 items, 5k instances
        auto sim = generate_sim1(data_cfg);
        auto vocab = build_vocabulary(sim.search, sim.rec);
        auto split = rec_split(sim.rec, vocab);

        RetrieverConfig cfg;
        cfg.seed = seed;
        auto report = train(cfg, split.train, vocab);

        // marginal predicted distribution over the training inputs
        std::vector<double> marginal(20, 0.0);
        for (const auto& inst : split.train) {
            auto probs = forward(report.params, inst.input);
            for (int i = 0; i < 20; ++i) marginal[static_cast<std::size_t>(i)] += probs[static_cast<std::size_t>(i)];
        }
        // empirical train target frequency
        std::vector<double> frequency(20, 0.0);
        for (const auto& inst : split.train) {
            frequency[static_cast<std::size_t>(inst.target - vocab.item_token(0))] += 1.0;
        }
        auto top5 = [](const std::vector<double>& v) {
            std::vector<int> ids(v.size());
            std::iota(ids.begin(), ids.end(), 0);
            std::partial_sort(ids.begin(), ids.begin() + 5, ids.end(),
                              [&](int a, int b) { return v[static_cast<std::size_t>(a)] > v[static_cast<std::size_t>(b)]; });
            return std::set<int>(ids.begin(), ids.begin() + 5);
        };
        auto predicted = top5(marginal);
        auto actual = top5(frequency);
        std::vector<int> overlap;
        std::set_intersection(predicted.begin(), predicted.end(), actual.begin(),
                              actual.end(), std::back_inserter(overlap));
        CHECK(overlap.size() >= 4);  // >= 80% of 5
    }
}

TEST_CASE("exploding training aborts with a diagnostic") {
    auto vocab = tiny_vocab(4, 2);
    std::vector<TrainingInstance> instances;
    for (int i = 0; i < 64; ++i) {
        instances.push_back({{0, 1}, vocab.item_token(i % 4), Task::Search});
    }
    RetrieverConfig cfg;
    cfg.learning_rate = 1e155;  // drives the logits to overflow
    cfg.batch_size = 8;
    cfg.epochs = 3;
    CHECK_THROWS_AS(train(cfg, instances, vocab), std::runtime_error);
}
