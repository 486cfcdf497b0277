#pragma once
// The desk-scale generative retriever: one shared embedding table over text
// and item-ID tokens, mean-pooled context, and a single softmax step over
// the item vocabulary. Trained with hand-derived gradients and decoupled
// weight decay; deterministic per seed.

#include <cstdint>
#include <span>
#include <vector>

#include "genir/corpus.hpp"

namespace genir {

struct RetrieverConfig {
    int embedding_dim = 32;
    double learning_rate = 0.002;
    double weight_decay = 0.01;
    int batch_size = 128;
    int epochs = 5;
    bool tie_output_embeddings = true;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RetrieverParams {
    int vocab_size = 0;
    int num_items = 0;
    int embedding_dim = 0;
    int item_token_offset = 0;  // vocabulary index of item 0's token
    bool tied = true;

    std::vector<double> input_embeddings;   // vocab_size x d, row-major
    std::vector<double> output_embeddings;  // num_items x d; empty when tied
    std::vector<double> item_bias;          // num_items

    std::span<const double> input_row(TokenIndex token) const;
    std::span<double> input_row(TokenIndex token);
    // Output-side representation of an item (the one the logits use).
    std::span<const double> output_row(ItemId item) const;
    std::span<double> output_row(ItemId item);

    bool all_finite() const;
};

// Zero-initialized gradient buffers matching a parameter set. Tied mode
// accumulates output-side gradients into the shared input rows.
struct ParamGradient {
    std::vector<double> input_embeddings;
    std::vector<double> output_embeddings;
    std::vector<double> item_bias;

    explicit ParamGradient(const RetrieverParams& params);
};

struct TrainReport {
    std::vector<double> epoch_losses;  // mean training loss per epoch
    RetrieverParams params;
    std::uint64_t seed = 0;
    int num_instances = 0;
};

// Fresh parameters: embeddings ~ N(0, 0.1^2) under the seed, biases zero.
RetrieverParams init_params(const RetrieverConfig& config, const Vocabulary& vocab);

// Softmax over items for one input: h = mean input embedding,
// logit_i = <output_i, h> + bias_i. Throws on an empty input.
std::vector<double> forward(const RetrieverParams& params,
                            std::span<const TokenIndex> input);

// Mean cross-entropy -log p(target) over the batch with analytic gradients.
double loss_and_gradient(const RetrieverParams& params,
                         std::span<const TrainingInstance> batch,
                         ParamGradient& grad);

// AdamW with decoupled multiplicative decay on the embeddings (biases are
// exempt so the popularity signal is not shrunk).
class AdamW {
public:
    AdamW(const RetrieverParams& params, double learning_rate, double weight_decay,
          double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

    void step(RetrieverParams& params, const ParamGradient& grad);
    long long steps_taken() const { return step_; }

private:
    void update_array(std::vector<double>& values, const std::vector<double>& grad,
                      std::vector<double>& m, std::vector<double>& v, bool decay);

    double lr_, wd_, beta1_, beta2_, eps_;
    long long step_ = 0;
    std::vector<double> m_input_, v_input_;
    std::vector<double> m_output_, v_output_;
    std::vector<double> m_bias_, v_bias_;
};

// Shuffled mini-batch epochs over the instances; deterministic per seed.
// Throws if the loss goes non-finite.
TrainReport train(const RetrieverConfig& config,
                  const std::vector<TrainingInstance>& instances,
                  const Vocabulary& vocab);

// The item representation the logits use (equals the embedding of the
// item's token in tied mode).
std::vector<double> item_embedding(const RetrieverParams& params, ItemId item);

}  // namespace genir
