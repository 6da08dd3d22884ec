#include "phytaylor/train.hpp"

#include <algorithm>
#include <cmath>

#include "phytaylor/errors.hpp"
#include "phytaylor/rng.hpp"

namespace phytaylor {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw InvalidArgument("train config: learning_rate must be > 0");
    if (batch_size < 1) throw InvalidArgument("train config: batch_size must be >= 1");
    if (epochs < 0) throw InvalidArgument("train config: epochs must be >= 0");
}

std::vector<std::size_t> Dataset::indices_of(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < splits.size(); ++i)
        if (splits[i] == s) out.push_back(i);
    return out;
}

void Dataset::assign_default_splits() {
    const std::size_t n = inputs.size();
    splits.assign(n, Split::train);
    const std::size_t train_end = n * 4 / 6;
    const std::size_t val_end = n * 5 / 6;
    for (std::size_t i = train_end; i < val_end; ++i) splits[i] = Split::val;
    for (std::size_t i = val_end; i < n; ++i) splits[i] = Split::test;
}

void Dataset::check_consistent() const {
    if (inputs.size() != targets.size() || inputs.size() != splits.size())
        throw DimensionMismatch("dataset: inputs, targets and splits must align");
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        if (inputs[i].size() != inputs[0].size() || targets[i].size() != targets[0].size())
            throw DimensionMismatch("dataset: inconsistent row dimensions");
    }
}

AdamOptimizer::AdamOptimizer(const PhyTaylorModel& model, double learning_rate)
    : lr_(learning_rate) {
    for (const auto& layer : model.layers()) {
        m_.emplace_back(layer.W.rows(), layer.W.cols());
        v_.emplace_back(layer.W.rows(), layer.W.cols());
    }
}

void AdamOptimizer::step(PhyTaylorModel& model, const GradientSet& grads) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++step_count_;
    const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_count_));
    const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_count_));
    for (int t = 0; t < model.layer_count(); ++t) {
        PhnLayer& layer = model.layer(t);
        const Mat& g = grads.weight_grads[static_cast<std::size_t>(t)];
        Mat& m = m_[static_cast<std::size_t>(t)];
        Mat& v = v_[static_cast<std::size_t>(t)];
        for (int i = 0; i < layer.W.rows(); ++i) {
            for (int j = 0; j < layer.W.cols(); ++j) {
                if (layer.M(i, j) == 0.0) continue;  // frozen
                const double gij = g(i, j);
                m(i, j) = kBeta1 * m(i, j) + (1.0 - kBeta1) * gij;
                v(i, j) = kBeta2 * v(i, j) + (1.0 - kBeta2) * gij * gij;
                const double mhat = m(i, j) / bias1;
                const double vhat = v(i, j) / bias2;
                layer.W(i, j) -= lr_ * mhat / (std::sqrt(vhat) + kEps);
            }
        }
    }
}

void SgdOptimizer::step(PhyTaylorModel& model, const GradientSet& grads) {
    for (int t = 0; t < model.layer_count(); ++t) {
        PhnLayer& layer = model.layer(t);
        const Mat& g = grads.weight_grads[static_cast<std::size_t>(t)];
        for (int i = 0; i < layer.W.rows(); ++i)
            for (int j = 0; j < layer.W.cols(); ++j)
                if (layer.M(i, j) != 0.0) layer.W(i, j) -= lr_ * g(i, j);
    }
}

namespace {

double sample_loss(const Vec& predicted, const Vec& target, LossKind kind) {
    double acc = 0.0;
    for (std::size_t d = 0; d < predicted.size(); ++d) {
        const double diff = predicted[d] - target[d];
        acc += kind == LossKind::mse ? diff * diff : std::abs(diff);
    }
    return acc;
}

Vec sample_loss_grad(const Vec& predicted, const Vec& target, LossKind kind) {
    Vec g(predicted.size());
    for (std::size_t d = 0; d < predicted.size(); ++d) {
        const double diff = predicted[d] - target[d];
        g[d] = kind == LossKind::mse ? 2.0 * diff : (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0));
    }
    return g;
}

void accumulate(GradientSet& total, const GradientSet& part, double scale) {
    if (total.weight_grads.empty()) {
        total.weight_grads.resize(part.weight_grads.size());
        for (std::size_t t = 0; t < part.weight_grads.size(); ++t)
            total.weight_grads[t] = Mat(part.weight_grads[t].rows(), part.weight_grads[t].cols());
    }
    for (std::size_t t = 0; t < part.weight_grads.size(); ++t) {
        auto& dst = total.weight_grads[t];
        const auto& src = part.weight_grads[t];
        for (int i = 0; i < dst.rows(); ++i)
            for (int j = 0; j < dst.cols(); ++j) dst(i, j) += scale * src(i, j);
    }
}

std::vector<Mat> snapshot_weights(const PhyTaylorModel& model) {
    std::vector<Mat> out;
    for (const auto& layer : model.layers()) out.push_back(layer.W);
    return out;
}

void restore_weights(PhyTaylorModel& model, const std::vector<Mat>& snapshot) {
    for (int t = 0; t < model.layer_count(); ++t) model.layer(t).W = snapshot[static_cast<std::size_t>(t)];
}

// Fisher-Yates with the library RNG so shuffles are seed-deterministic.
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

double evaluate_loss(const PhyTaylorModel& model, const Dataset& data, Split split,
                     LossKind loss) {
    const auto idx = data.indices_of(split);
    if (idx.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i : idx) acc += sample_loss(predict(model, data.inputs[i]), data.targets[i], loss);
    return acc / static_cast<double>(idx.size());
}

TrainResult train_model(PhyTaylorModel& model, const Dataset& data, const TrainConfig& config) {
    config.validate();
    data.check_consistent();
    if (!data.inputs.empty()) {
        if (static_cast<int>(data.inputs[0].size()) != model.input_dim())
            throw DimensionMismatch("train: dataset input dim does not match model");
        if (static_cast<int>(data.targets[0].size()) != model.terminal_out_dim())
            throw DimensionMismatch("train: dataset target dim does not match model");
    }

    Rng rng(config.seed);
    auto train_idx = data.indices_of(Split::train);
    TrainResult result;

    AdamOptimizer adam(model, config.learning_rate);
    SgdOptimizer sgd(config.learning_rate);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto checkpoint = snapshot_weights(model);
        shuffle_indices(train_idx, rng);

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        bool bad = false;
        for (std::size_t begin = 0; begin < train_idx.size() && !bad;
             begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(train_idx.size(), begin + static_cast<std::size_t>(config.batch_size));
            const double inv_batch = 1.0 / static_cast<double>(end - begin);

            GradientSet total;
            double batch_loss = 0.0;
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t i = train_idx[k];
                ForwardTrace trace = forward(model, data.inputs[i]);
                batch_loss += sample_loss(trace.output, data.targets[i], config.loss);
                Vec dy = sample_loss_grad(trace.output, data.targets[i], config.loss);
                for (double& g : dy) g *= inv_batch;
                accumulate(total, backward(model, trace, dy), 1.0);
            }
            batch_loss *= inv_batch;
            if (!std::isfinite(batch_loss)) {
                bad = true;
                break;
            }
            epoch_loss += batch_loss * static_cast<double>(end - begin);
            seen += end - begin;
            if (config.optimizer == OptimizerKind::adam)
                adam.step(model, total);
            else
                sgd.step(model, total);
        }

        if (bad) {
            restore_weights(model, checkpoint);
            result.diverged = true;
            result.diverged_at_epoch = epoch;
            break;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = seen ? epoch_loss / static_cast<double>(seen) : 0.0;
        rec.val_loss = evaluate_loss(model, data, Split::val, config.loss);
        result.history.push_back(rec);
    }
    return result;
}

namespace {

void require_polynomial(const PhyTaylorModel& model, const char* role) {
    for (const auto& layer : model.layers()) {
        for (const auto& ch : layer.suppressor)
            if (ch.active)
                throw InvalidArgument(std::string(role) + " model must not use a suppressor");
        if (layer.activation == Activation::identity) continue;
        for (auto flag : layer.a)
            if (flag)
                throw InvalidArgument(std::string(role) +
                                      " model must have inactive (identity) activations");
    }
}

}  // namespace

TrainResult train_selfcorrecting(PhyTaylorModel& policy, PhyTaylorModel& safety,
                                 const std::vector<Vec>& states,
                                 const std::vector<Vec>& command_refs,
                                 const std::vector<Vec>& safety_truths,
                                 const TrainConfig& config) {
    config.validate();
    if (states.size() != command_refs.size() || states.size() != safety_truths.size())
        throw DimensionMismatch("self-correcting training: sample lists must align");
    if (policy.terminal_out_dim() != safety.input_dim())
        throw DimensionMismatch("self-correcting training: policy output dim " +
                                std::to_string(policy.terminal_out_dim()) +
                                " does not feed safety input dim " +
                                std::to_string(safety.input_dim()));
    require_polynomial(safety, "safety");

    Rng rng(config.seed);
    std::vector<std::size_t> idx(states.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

    AdamOptimizer policy_adam(policy, config.learning_rate);
    AdamOptimizer safety_adam(safety, config.learning_rate);
    SgdOptimizer policy_sgd(config.learning_rate);
    SgdOptimizer safety_sgd(config.learning_rate);

    TrainResult result;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto policy_ckpt = snapshot_weights(policy);
        auto safety_ckpt = snapshot_weights(safety);
        shuffle_indices(idx, rng);

        double epoch_loss = 0.0;
        bool bad = false;
        for (std::size_t begin = 0; begin < idx.size() && !bad;
             begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(idx.size(), begin + static_cast<std::size_t>(config.batch_size));
            const double inv_batch = 1.0 / static_cast<double>(end - begin);

            GradientSet policy_total, safety_total;
            double batch_loss = 0.0;
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t i = idx[k];
                ForwardTrace policy_trace = forward(policy, states[i]);
                const Vec& u = policy_trace.output;
                ForwardTrace safety_trace = forward(safety, u);
                const Vec& s = safety_trace.output;

                double loss = 0.0;
                Vec ds(s.size());
                for (std::size_t d = 0; d < s.size(); ++d) {
                    const double diff = s[d] - safety_truths[i][d];
                    loss += config.alpha * diff * diff;
                    ds[d] = inv_batch * config.alpha * 2.0 * diff;
                }
                Vec du(u.size(), 0.0);
                for (std::size_t d = 0; d < u.size(); ++d) {
                    const double diff = u[d] - command_refs[i][d];
                    loss += config.beta * diff * diff;
                    du[d] = inv_batch * config.beta * 2.0 * diff;
                }
                batch_loss += loss;

                GradientSet safety_grads = backward(safety, safety_trace, ds);
                for (std::size_t d = 0; d < u.size(); ++d) du[d] += safety_grads.input_grad[d];
                GradientSet policy_grads = backward(policy, policy_trace, du);
                accumulate(safety_total, safety_grads, 1.0);
                accumulate(policy_total, policy_grads, 1.0);
            }
            batch_loss *= inv_batch;
            if (!std::isfinite(batch_loss)) {
                bad = true;
                break;
            }
            epoch_loss += batch_loss * static_cast<double>(end - begin);
            if (config.optimizer == OptimizerKind::adam) {
                policy_adam.step(policy, policy_total);
                safety_adam.step(safety, safety_total);
            } else {
                policy_sgd.step(policy, policy_total);
                safety_sgd.step(safety, safety_total);
            }
        }

        if (bad) {
            restore_weights(policy, policy_ckpt);
            restore_weights(safety, safety_ckpt);
            result.diverged = true;
            result.diverged_at_epoch = epoch;
            break;
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = idx.empty() ? 0.0 : epoch_loss / static_cast<double>(idx.size());
        rec.val_loss = rec.train_loss;
        result.history.push_back(rec);
    }
    return result;
}

double rollout_error(const PhyTaylorModel& model, const std::vector<Vec>& truth_trajectory,
                     std::size_t start_index, int horizon) {
    if (model.input_dim() != model.terminal_out_dim())
        throw DimensionMismatch("rollout: model must map state dim to state dim");
    if (horizon < 1) throw InvalidArgument("rollout: horizon must be >= 1");
    if (start_index + static_cast<std::size_t>(horizon) + 1 > truth_trajectory.size())
        throw HorizonExceeded("rollout: horizon exceeds trajectory length");

    const double inv_dim = 1.0 / static_cast<double>(model.input_dim());
    Vec state = truth_trajectory[start_index];
    double acc = 0.0;
    for (int t = 1; t <= horizon; ++t) {
        state = predict(model, state);
        Vec diff(state.size());
        const Vec& truth = truth_trajectory[start_index + static_cast<std::size_t>(t)];
        for (std::size_t d = 0; d < state.size(); ++d) diff[d] = state[d] - truth[d];
        acc += inv_dim * norm(diff);
    }
    return acc / static_cast<double>(horizon);
}

}  // namespace phytaylor
