#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phytaylor/editing.hpp"
#include "phytaylor/linalg.hpp"
#include "phytaylor/network.hpp"

namespace phytaylor {

enum class OptimizerKind { adam, sgd };
enum class LossKind { mse, mae };

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = 5e-4;
    int batch_size = 200;
    int epochs = 100;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::mse;
    // Dual-objective weights for the self-correcting trainer.
    double alpha = 1.0;
    double beta = 1.0;

    void validate() const;
};

enum class Split { train, val, test };

struct Dataset {
    std::vector<Vec> inputs;
    std::vector<Vec> targets;
    std::vector<Split> splits;

    std::size_t size() const { return inputs.size(); }
    std::vector<std::size_t> indices_of(Split s) const;
    // Contiguous 4/1/1 assignment.
    void assign_default_splits();
    void check_consistent() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    bool diverged = false;
    int diverged_at_epoch = -1;  // weights restored to the previous epoch
};

// Adam with bias-corrected moment estimates; beta1 = 0.9, beta2 = 0.999,
// epsilon = 1e-8. Updates only positions with mask 1.
class AdamOptimizer {
public:
    AdamOptimizer(const PhyTaylorModel& model, double learning_rate);
    void step(PhyTaylorModel& model, const GradientSet& grads);

private:
    double lr_;
    long step_count_ = 0;
    std::vector<Mat> m_;
    std::vector<Mat> v_;
};

class SgdOptimizer {
public:
    explicit SgdOptimizer(double learning_rate) : lr_(learning_rate) {}
    void step(PhyTaylorModel& model, const GradientSet& grads);

private:
    double lr_;
};

// Mean per-sample squared-Euclidean (or absolute) loss over the given split.
double evaluate_loss(const PhyTaylorModel& model, const Dataset& data, Split split,
                     LossKind loss);

// Seeded, deterministic training loop. Weights change only at trainable
// positions. A non-finite batch loss restores the previous epoch's weights
// and stops.
TrainResult train_model(PhyTaylorModel& model, const Dataset& data, const TrainConfig& config);

// Joint step on the policy/safety cascade with loss
//   alpha * ||s(u) - s_truth||^2 + beta * ||u_ref - u||^2
// averaged over the batch; the alpha term's gradient flows through the safety
// network into the policy network. The safety model must be purely polynomial
// (identity activations or silenced masks, no suppressor).
TrainResult train_selfcorrecting(PhyTaylorModel& policy, PhyTaylorModel& safety,
                                 const std::vector<Vec>& states,
                                 const std::vector<Vec>& command_refs,
                                 const std::vector<Vec>& safety_truths,
                                 const TrainConfig& config);

// Closed-loop rollout error: predictions feed back, scored as
// (1/horizon) * sum_t ||prediction(t) - truth(t)|| / state_dim.
double rollout_error(const PhyTaylorModel& model, const std::vector<Vec>& truth_trajectory,
                     std::size_t start_index, int horizon);

}  // namespace phytaylor
