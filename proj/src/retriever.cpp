#include "genir/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "genir/rng.hpp"

namespace genir {

void RetrieverConfig::validate() const {
    if (embedding_dim < 2) throw std::invalid_argument("embedding_dim must be >= 2");
    if (learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
    if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
}

std::span<const double> RetrieverParams::input_row(TokenIndex token) const {
    return {input_embeddings.data() +
                static_cast<std::size_t>(token) * static_cast<std::size_t>(embedding_dim),
            static_cast<std::size_t>(embedding_dim)};
}

std::span<double> RetrieverParams::input_row(TokenIndex token) {
    return {input_embeddings.data() +
                static_cast<std::size_t>(token) * static_cast<std::size_t>(embedding_dim),
            static_cast<std::size_t>(embedding_dim)};
}

std::span<const double> RetrieverParams::output_row(ItemId item) const {
    if (tied) return input_row(item_token_offset + item);
    return {output_embeddings.data() +
                static_cast<std::size_t>(item) * static_cast<std::size_t>(embedding_dim),
            static_cast<std::size_t>(embedding_dim)};
}

std::span<double> RetrieverParams::output_row(ItemId item) {
    if (tied) return input_row(item_token_offset + item);
    return {output_embeddings.data() +
                static_cast<std::size_t>(item) * static_cast<std::size_t>(embedding_dim),
            static_cast<std::size_t>(embedding_dim)};
}

bool RetrieverParams::all_finite() const {
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return finite(input_embeddings) && finite(output_embeddings) && finite(item_bias);
}

ParamGradient::ParamGradient(const RetrieverParams& params)
    : input_embeddings(params.input_embeddings.size(), 0.0),
      output_embeddings(params.output_embeddings.size(), 0.0),
      item_bias(params.item_bias.size(), 0.0) {}

RetrieverParams init_params(const RetrieverConfig& config, const Vocabulary& vocab) {
    config.validate();
    RetrieverParams params;
    params.vocab_size = vocab.size();
    params.num_items = vocab.num_items();
    params.embedding_dim = config.embedding_dim;
    params.item_token_offset = vocab.item_token(0);
    params.tied = config.tie_output_embeddings;

    auto rng = make_rng(config.seed, "init");
    std::normal_distribution<double> normal(0.0, 0.1);
    params.input_embeddings.resize(static_cast<std::size_t>(params.vocab_size) *
                                   static_cast<std::size_t>(params.embedding_dim));
    for (double& w : params.input_embeddings) w = normal(rng);
    if (!params.tied) {
        params.output_embeddings.resize(static_cast<std::size_t>(params.num_items) *
                                        static_cast<std::size_t>(params.embedding_dim));
        for (double& w : params.output_embeddings) w = normal(rng);
    }
    params.item_bias.assign(static_cast<std::size_t>(params.num_items), 0.0);
    return params;
}

namespace {

// context = mean of input token embeddings
std::vector<double> mean_context(const RetrieverParams& params,
                                 std::span<const TokenIndex> input) {
    if (input.empty()) throw std::invalid_argument("forward: empty input");
    std::vector<double> h(static_cast<std::size_t>(params.embedding_dim), 0.0);
    for (TokenIndex token : input) {
        if (token < 0 || token >= params.vocab_size) {
            throw std::invalid_argument("forward: token index out of range");
        }
        auto row = params.input_row(token);
        for (int d = 0; d < params.embedding_dim; ++d) {
            h[static_cast<std::size_t>(d)] += row[static_cast<std::size_t>(d)];
        }
    }
    const double inv = 1.0 / static_cast<double>(input.size());
    for (double& x : h) x *= inv;
    return h;
}

std::vector<double> item_logits(const RetrieverParams& params,
                                const std::vector<double>& h) {
    std::vector<double> logits(static_cast<std::size_t>(params.num_items));
    for (ItemId i = 0; i < params.num_items; ++i) {
        auto row = params.output_row(i);
        double dot = 0.0;
        for (int d = 0; d < params.embedding_dim; ++d) {
            dot += row[static_cast<std::size_t>(d)] * h[static_cast<std::size_t>(d)];
        }
        logits[static_cast<std::size_t>(i)] = dot + params.item_bias[static_cast<std::size_t>(i)];
    }
    return logits;
}

void softmax_inplace(std::vector<double>& logits) {
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& x : logits) {
        x = std::exp(x - max_logit);
        sum += x;
    }
    for (double& x : logits) x /= sum;
}

}  // namespace

std::vector<double> forward(const RetrieverParams& params,
                            std::span<const TokenIndex> input) {
    std::vector<double> probs = item_logits(params, mean_context(params, input));
    softmax_inplace(probs);
    return probs;
}

double loss_and_gradient(const RetrieverParams& params,
                         std::span<const TrainingInstance> batch,
                         ParamGradient& grad) {
    if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    std::fill(grad.input_embeddings.begin(), grad.input_embeddings.end(), 0.0);
    std::fill(grad.output_embeddings.begin(), grad.output_embeddings.end(), 0.0);
    std::fill(grad.item_bias.begin(), grad.item_bias.end(), 0.0);

    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    const int d = params.embedding_dim;
    double loss = 0.0;
    std::vector<double> dh(static_cast<std::size_t>(d));

    for (const auto& instance : batch) {
        ItemId target = instance.target - params.item_token_offset;
        if (target < 0 || target >= params.num_items) {
            throw std::invalid_argument("loss_and_gradient: target out of item range");
        }
        std::vector<double> h = mean_context(params, instance.input);
        std::vector<double> probs = item_logits(params, h);
        softmax_inplace(probs);
        loss -= std::log(probs[static_cast<std::size_t>(target)]) * inv_batch;

        // dL/dlogit_i = (p_i - [i == target]) / batch
        std::fill(dh.begin(), dh.end(), 0.0);
        for (ItemId i = 0; i < params.num_items; ++i) {
            double delta = probs[static_cast<std::size_t>(i)] - (i == target ? 1.0 : 0.0);
            delta *= inv_batch;
            grad.item_bias[static_cast<std::size_t>(i)] += delta;
            auto out_row = params.output_row(i);
            double* grad_out =
                params.tied
                    ? grad.input_embeddings.data() +
                          static_cast<std::size_t>(params.item_token_offset + i) *
                              static_cast<std::size_t>(d)
                    : grad.output_embeddings.data() +
                          static_cast<std::size_t>(i) * static_cast<std::size_t>(d);
            for (int k = 0; k < d; ++k) {
                grad_out[k] += delta * h[static_cast<std::size_t>(k)];
                dh[static_cast<std::size_t>(k)] += delta * out_row[static_cast<std::size_t>(k)];
            }
        }
        // spread dh over the input rows, 1/|input| per occurrence
        const double inv_len = 1.0 / static_cast<double>(instance.input.size());
        for (TokenIndex token : instance.input) {
            double* grad_in = grad.input_embeddings.data() +
                              static_cast<std::size_t>(token) * static_cast<std::size_t>(d);
            for (int k = 0; k < d; ++k) {
                grad_in[k] += dh[static_cast<std::size_t>(k)] * inv_len;
            }
        }
    }
    return loss;
}

AdamW::AdamW(const RetrieverParams& params, double learning_rate, double weight_decay,
             double beta1, double beta2, double epsilon)
    : lr_(learning_rate), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(epsilon),
      m_input_(params.input_embeddings.size(), 0.0),
      v_input_(params.input_embeddings.size(), 0.0),
      m_output_(params.output_embeddings.size(), 0.0),
      v_output_(params.output_embeddings.size(), 0.0),
      m_bias_(params.item_bias.size(), 0.0),
      v_bias_(params.item_bias.size(), 0.0) {}

void AdamW::update_array(std::vector<double>& values, const std::vector<double>& grad,
                         std::vector<double>& m, std::vector<double>& v, bool decay) {
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    const double decay_factor = 1.0 - lr_ * wd_;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double g = grad[i];
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
        double m_hat = m[i] / bc1;
        double v_hat = v[i] / bc2;
        if (decay) values[i] *= decay_factor;  // decoupled from the adaptive step
        values[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
}

void AdamW::step(RetrieverParams& params, const ParamGradient& grad) {
    ++step_;
    update_array(params.input_embeddings, grad.input_embeddings, m_input_, v_input_,
                 /*decay=*/true);
    if (!params.tied) {
        update_array(params.output_embeddings, grad.output_embeddings, m_output_,
                     v_output_, /*decay=*/true);
    }
    update_array(params.item_bias, grad.item_bias, m_bias_, v_bias_, /*decay=*/false);
}

TrainReport train(const RetrieverConfig& config,
                  const std::vector<TrainingInstance>& instances,
                  const Vocabulary& vocab) {
    config.validate();
    if (instances.empty()) throw std::invalid_argument("train: no instances");

    TrainReport report;
    report.seed = config.seed;
    report.num_instances = static_cast<int>(instances.size());
    report.params = init_params(config, vocab);

    AdamW optimizer(report.params, config.learning_rate, config.weight_decay);
    ParamGradient grad(report.params);
    auto shuffle_rng = make_rng(config.seed, "epoch_shuffle");

    std::vector<std::size_t> order(instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<TrainingInstance> batch;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t cursor = 0;
        int batches = 0;
        while (cursor < order.size()) {
            batch.clear();
            for (std::size_t i = cursor;
                 i < std::min(cursor + static_cast<std::size_t>(config.batch_size), order.size());
                 ++i) {
                batch.push_back(instances[order[i]]);
            }
            cursor += batch.size();
            double loss = loss_and_gradient(report.params, batch, grad);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(batches + 1));
            }
            optimizer.step(report.params, grad);
            epoch_loss += loss;
            ++batches;
        }
        report.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
    }
    if (!report.params.all_finite()) {
        throw std::runtime_error("train: parameters went non-finite");
    }
    return report;
}

std::vector<double> item_embedding(const RetrieverParams& params, ItemId item) {
    if (item < 0 || item >= params.num_items) {
        throw std::invalid_argument("item_embedding: item out of range");
    }
    auto row = params.output_row(item);
    return std::vector<double>(row.begin(), row.end());
}

}  // namespace genir
