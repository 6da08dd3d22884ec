#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "phytaylor/datagen.hpp"
#include "phytaylor/errors.hpp"
#include "phytaylor/io.hpp"
#include "phytaylor/monomial.hpp"
#include "phytaylor/network.hpp"
#include "phytaylor/rng.hpp"
#include "phytaylor/selfcorrect.hpp"
#include "phytaylor/train.hpp"

namespace {

using namespace phytaylor;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

Vec parse_vector(const std::string& text) {
    Vec out;
    std::stringstream stream(text);
    std::string cell;
    while (std::getline(stream, cell, ',')) out.push_back(parse_double(cell, 0));
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    if (text.empty()) return out;
    std::stringstream stream(text);
    std::string cell;
    while (std::getline(stream, cell, ',')) out.push_back(std::stoi(cell));
    return out;
}

std::string join_csv(const Vec& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_double(values[i]);
    }
    return out;
}

int cmd_augment(int dim, int order, const std::string& eval_text, const std::string& format) {
    MonomialBasis basis = build_basis(dim, order);
    if (format == "csv") {
        std::cout << "index,exponents,monomial\n";
        for (int k = 0; k < basis.size(); ++k) {
            std::cout << k << ",\"";
            const auto& exps = basis.term(k).exponents;
            for (std::size_t i = 0; i < exps.size(); ++i)
                std::cout << (i ? " " : "") << exps[i];
            std::cout << "\"," << monomial_to_string(basis.term(k)) << "\n";
        }
    } else {
        for (int k = 0; k < basis.size(); ++k) {
            const auto& exps = basis.term(k).exponents;
            std::cout << k << "  (";
            for (std::size_t i = 0; i < exps.size(); ++i) std::cout << (i ? "," : "") << exps[i];
            std::cout << ")  " << monomial_to_string(basis.term(k)) << "\n";
        }
    }
    if (!eval_text.empty()) {
        Vec x = parse_vector(eval_text);
        std::cout << join_csv(evaluate(basis, x)) << "\n";
    }
    return kExitOk;
}

int cmd_simulate_pendulum(const PendulumParams& params, double angle_lo, double angle_hi,
                          const std::string& out, const std::string& traj_out,
                          const std::string& model_out, const std::string& knowledge_name,
                          int model_order) {
    PendulumDataset generated = simulate_pendulums(params, angle_lo, angle_hi);
    save_pairs_csv(generated.data, out, "s");

    std::ostringstream sidecar;
    sidecar << "phy-taylor params v1\n"
            << "system pendulum\n"
            << "seed " << params.seed << "\n"
            << "dt " << format_double(params.dt) << "\n"
            << "sample_period " << format_double(params.sample_period) << "\n"
            << "trajectories " << params.trajectories << "\n"
            << "steps " << params.steps_per_trajectory << "\n"
            << "gravity " << format_double(params.gravity) << "\n"
            << "length " << format_double(params.length) << "\n"
            << "mass " << format_double(params.mass) << "\n"
            << "spring " << format_double(params.spring) << "\n"
            << "angle_lo " << format_double(angle_lo) << "\n"
            << "angle_hi " << format_double(angle_hi) << "\n";
    write_file(out + ".params", sidecar.str());

    if (!traj_out.empty() && !generated.trajectories.empty())
        save_trajectory_csv(generated.trajectories.front(), traj_out, "s");

    if (!model_out.empty()) {
        PendulumKnowledge level = PendulumKnowledge::none;
        if (knowledge_name == "law") level = PendulumKnowledge::law;
        else if (knowledge_name == "law_topology") level = PendulumKnowledge::law_topology;
        else if (knowledge_name == "full") level = PendulumKnowledge::full;
        else if (knowledge_name != "none")
            throw InvalidArgument("unknown knowledge level: " + knowledge_name);
        KnowledgeSpec spec = pendulum_knowledge(params, level, model_order);
        ModelConfig cfg;
        cfg.input_dim = 6;
        cfg.first_order = model_order;
        cfg.terminal_out_dim = 6;
        cfg.knowledge = spec.entries();
        cfg.plan = {LayerPlan{6, model_order, Activation::identity, {}}};
        save_model_config(cfg, model_out);
    }
    return kExitOk;
}

int cmd_simulate_vehicle(const VehicleParams& params, const Vec& initial, const std::string& out,
                         const std::string& traj_out, const std::string& model_out,
                         int model_order) {
    VehicleDataset generated = simulate_vehicle(params, initial);
    save_pairs_csv(generated.data, out, "x");

    std::ostringstream sidecar;
    sidecar << "phy-taylor params v1\n"
            << "system vehicle\n"
            << "seed " << params.seed << "\n"
            << "sampling_period " << format_double(params.sampling_period) << "\n"
            << "noise_std " << format_double(params.noise_std) << "\n"
            << "steps " << params.steps << "\n"
            << "initial " << join_csv(initial) << "\n";
    write_file(out + ".params", sidecar.str());

    if (!traj_out.empty()) save_trajectory_csv(generated.trajectory, traj_out, "x");

    if (!model_out.empty()) {
        KnowledgeSpec spec = vehicle_knowledge(params, model_order);
        ModelConfig cfg;
        cfg.input_dim = 6;
        cfg.first_order = model_order;
        cfg.terminal_out_dim = 6;
        cfg.knowledge = spec.entries();
        cfg.plan = {LayerPlan{7, model_order, Activation::tanh, {}},
                    LayerPlan{6, model_order, Activation::identity, {}}};
        save_model_config(cfg, model_out);
    }
    return kExitOk;
}

bool log_debug() {
    const char* level = std::getenv("PHYTAYLOR_LOG");
    return level && std::string(level) == "debug";
}

int cmd_train(const std::string& model_path, const std::string& data_path,
              const std::string& out_path, const std::string& history_path,
              const std::string& report_path, const TrainConfig& config, double init_stddev) {
    ModelConfig cfg = load_model_config(model_path);
    PhyTaylorModel model = cfg.build();
    if (cfg.knowledge_spec().fully_known())
        std::cerr << "warning: every knowledge entry is known; nothing to train\n";
    Dataset data = load_csv(data_path, model.input_dim(), model.terminal_out_dim());

    Rng init_rng(config.seed);
    init_weights(model, init_rng, init_stddev);
    TrainResult result = train_model(model, data, config);
    if (log_debug()) {
        std::cerr << "config hash " << std::hex << cfg.hash() << std::dec << "\n";
        for (const auto& rec : result.history)
            std::cerr << "epoch " << rec.epoch << " train " << format_double(rec.train_loss)
                      << " val " << format_double(rec.val_loss) << "\n";
    }

    save_weights(model, cfg.hash(), out_path);
    if (!history_path.empty()) save_history_csv(result.history, history_path);
    if (!report_path.empty()) {
        RunReport report;
        report.config_hash = cfg.hash();
        report.seed = config.seed;
        report.history = result.history;
        save_report(report, report_path);
    }
    if (result.diverged) {
        std::cerr << "training diverged at epoch " << result.diverged_at_epoch
                  << "; weights restored to the last finite epoch\n";
        return kExitNumeric;
    }
    if (!result.history.empty())
        std::cout << "final train_loss " << format_double(result.history.back().train_loss)
                  << " val_loss " << format_double(result.history.back().val_loss) << "\n";
    return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& weights_path,
                const std::string& input_text) {
    ModelConfig cfg = load_model_config(model_path);
    PhyTaylorModel model = cfg.build();
    load_weights(model, cfg.hash(), weights_path);
    std::cout << join_csv(predict(model, parse_vector(input_text))) << "\n";
    return kExitOk;
}

int cmd_rollout(const std::string& model_path, const std::string& weights_path,
                const std::string& traj_path, std::size_t start, int horizon,
                const std::string& report_path) {
    ModelConfig cfg = load_model_config(model_path);
    PhyTaylorModel model = cfg.build();
    load_weights(model, cfg.hash(), weights_path);
    auto trajectory = load_trajectory_csv(traj_path, model.input_dim());
    const double error = rollout_error(model, trajectory, start, horizon);
    std::cout << "rollout_error " << format_double(error) << "\n";
    if (!report_path.empty()) {
        RunReport report;
        report.config_hash = cfg.hash();
        report.rollout_errors = {error};
        save_report(report, report_path);
    }
    return kExitOk;
}

int cmd_verify(const std::string& model_path, const std::string& weights_path, int probes,
               std::uint64_t seed) {
    ModelConfig cfg = load_model_config(model_path);
    PhyTaylorModel model = cfg.build();
    load_weights(model, cfg.hash(), weights_path);
    KnowledgeSpec spec = cfg.knowledge_spec();

    Rng rng(seed);
    double worst = 0.0;
    long positions = 0;
    for (int p = 0; p < probes; ++p) {
        Vec x(static_cast<std::size_t>(model.input_dim()));
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        worst = std::max(worst, compliance_deviation(model, spec, x, &positions));
    }
    if (positions == 0) {
        std::cout << "0 known positions; compliance holds vacuously\n";
        return kExitOk;
    }
    std::cout << "max_deviation " << format_double(worst) << " over " << positions
              << " known positions x " << probes << " probes\n";
    return worst <= 1e-9 ? kExitOk : kExitNumeric;
}

int cmd_correct(const std::string& safety_path, const std::string& bounds_text,
                const std::string& box_text, const std::string& u_text, bool do_revise) {
    auto quadratics = load_quadratics(safety_path);
    if (quadratics.size() != 2)
        throw InvalidArgument("safety config must hold exactly two quadratics");
    Vec bounds = parse_vector(bounds_text);
    Vec box_values = parse_vector(box_text);
    if (box_values.size() != 4)
        throw InvalidArgument("--box needs theta_min,theta_max,gamma_min,gamma_max");
    CommandBox box{{box_values[0], box_values[2]}, {box_values[1], box_values[3]}};
    Vec u = parse_vector(u_text);

    SafetyQuadratic s1 = quadratics[0];
    SafetyQuadratic s2 = quadratics[1];
    if (do_revise) {
        s1 = revise(s1, box);
        s2 = revise(s2, box);
    }
    CorrectionProblem problem{s1, s2, bounds, box};
    const Vec corrected = correct_commands(problem, u);

    const double c1_hat = std::min(s1.evaluate(u), bounds[0]);
    const double c2_hat = std::min(s2.evaluate(u), bounds[1]);
    const bool was_safe = s1.evaluate(u) <= bounds[0] && s2.evaluate(u) <= bounds[1];
    std::cout << "corrected " << join_csv(corrected) << "\n";
    if (was_safe) {
        std::cout << "residual1 " << format_double(s1.evaluate(corrected) - bounds[0]) << "\n";
        std::cout << "residual2 " << format_double(s2.evaluate(corrected) - bounds[1]) << "\n";
    } else {
        std::cout << "residual1 " << format_double(s1.evaluate(corrected) - c1_hat) << "\n";
        std::cout << "residual2 " << format_double(s2.evaluate(corrected) - c2_hat) << "\n";
    }
    return kExitOk;
}

int cmd_complexity(int dim, int order, const std::string& orders_text, const std::string& dims_text,
                   int terminal_out, const std::string& dense_text) {
    const std::int64_t single_len = basis_len(dim, order);
    std::cout << "single_basis_len " << single_len << "\n";
    std::cout << "single_nonconstant_weights " << (single_len - 1) * terminal_out << "\n";

    auto orders = parse_int_list(orders_text);
    auto dims = parse_int_list(dims_text);
    if (!orders.empty()) {
        std::int64_t weight_sum = 0;
        for (std::size_t v = 0; v < orders.size(); ++v) {
            const int stage_dim = v == 0 ? dim : dims[v - 1];
            const int stage_out = v + 1 < orders.size() ? dims[v] : terminal_out;
            const std::int64_t len = basis_len(stage_dim, orders[v]);
            weight_sum += (len - 1) * stage_out;
            std::cout << "cascade_stage " << (v + 1) << " in_dim " << stage_dim << " order "
                      << orders[v] << " len " << len << " out_dim " << stage_out << "\n";
        }
        std::cout << "cascade_nonconstant_weights " << weight_sum << "\n";
        std::cout << "difference_direct "
                  << cascade_complexity_difference(dim, order, dims, orders) << "\n";
        std::cout << "difference_closed_form "
                  << cascade_complexity_closed_form(dim, order, dims, orders) << "\n";
    }

    if (!dense_text.empty()) {
        auto mnp = parse_int_list(dense_text);
        if (mnp.size() != 3) throw InvalidArgument("--dense needs m,n,p");
        const std::int64_t m = mnp[0], n = mnp[1], p = mnp[2];
        std::cout << "dense_two_layer_params " << ((m + 1) * n + (n + 1) * p) << "\n";
        std::cout << "single_phn_params " << ((n + 1) * p) << "\n";
        std::cout << "parameter_reduction " << ((m + 1) * n) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Taylor-augmented physics-compatible networks: data generation, editing, "
                 "training, verification and safe command correction"};
    app.require_subcommand(1);

    // augment
    auto* augment = app.add_subcommand("augment", "Print the monomial basis, optionally evaluated");
    int aug_dim = 0, aug_order = 0;
    std::string aug_eval, aug_format = "text";
    augment->add_option("--dim", aug_dim, "Input dimension")->required();
    augment->add_option("--order", aug_order, "Augmentation order")->required();
    augment->add_option("--eval", aug_eval, "Comma-separated input to evaluate");
    augment->add_option("--format", aug_format, "text or csv")
        ->check(CLI::IsMember({"text", "csv"}));

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate synthetic datasets");
    simulate->require_subcommand(1);
    auto* pendulum = simulate->add_subcommand("pendulum", "Three coupled pendulums");
    PendulumParams pendulum_params;
    double angle_lo = -1.0, angle_hi = 1.0;
    std::string pen_out, pen_traj_out, pen_model_out, pen_knowledge = "full";
    int pen_model_order = 3;
    std::uint64_t pen_seed = 0;
    pendulum->add_option("--out", pen_out, "Output CSV of (state, next state) pairs")->required();
    pendulum->add_option("--seed", pen_seed, "RNG seed");
    pendulum->add_option("--trajectories", pendulum_params.trajectories, "Number of runs");
    pendulum->add_option("--steps", pendulum_params.steps_per_trajectory, "Samples per run");
    pendulum->add_option("--dt", pendulum_params.dt, "Integrator step");
    pendulum->add_option("--sample-period", pendulum_params.sample_period, "Recording period");
    pendulum->add_option("--gravity", pendulum_params.gravity, "Gravity");
    pendulum->add_option("--length", pendulum_params.length, "Pendulum length");
    pendulum->add_option("--mass", pendulum_params.mass, "Pendulum mass");
    pendulum->add_option("--spring", pendulum_params.spring, "Coupling spring constant");
    pendulum->add_option("--angle-lo", angle_lo, "Initial angle lower bound");
    pendulum->add_option("--angle-hi", angle_hi, "Initial angle upper bound");
    pendulum->add_option("--traj-out", pen_traj_out, "Write the first trajectory as CSV");
    pendulum->add_option("--model-out", pen_model_out, "Write a ready-to-train model config");
    pendulum->add_option("--knowledge", pen_knowledge, "none, law, law_topology or full")
        ->check(CLI::IsMember({"none", "law", "law_topology", "full"}));
    pendulum->add_option("--model-order", pen_model_order, "Augmentation order of the model");

    auto* vehicle = simulate->add_subcommand("vehicle", "Six-state discrete vehicle model");
    VehicleParams vehicle_params;
    std::string veh_out, veh_traj_out, veh_model_out, veh_initial = "0,0,0,1,0.5,0.2";
    int veh_model_order = 2;
    std::uint64_t veh_seed = 0;
    vehicle->add_option("--out", veh_out, "Output CSV of (state, next state) pairs")->required();
    vehicle->add_option("--seed", veh_seed, "RNG seed");
    vehicle->add_option("--steps", vehicle_params.steps, "Number of transitions");
    vehicle->add_option("--T", vehicle_params.sampling_period, "Sampling period");
    vehicle->add_option("--noise-std", vehicle_params.noise_std, "Observation noise");
    vehicle->add_option("--initial", veh_initial, "Initial state, comma separated");
    vehicle->add_option("--traj-out", veh_traj_out, "Write the noise-free trajectory as CSV");
    vehicle->add_option("--model-out", veh_model_out, "Write a ready-to-train model config");
    vehicle->add_option("--model-order", veh_model_order, "Augmentation order of the model");

    // train
    auto* train = app.add_subcommand("train", "Train a model on a pair CSV");
    std::string train_model_path, train_data, train_out, train_history, train_report;
    TrainConfig train_config;
    double init_stddev = 0.1;
    std::string optimizer = "adam", loss = "mse";
    train->add_option("--model", train_model_path, "Model config")->required();
    train->add_option("--data", train_data, "Training CSV")->required();
    train->add_option("--out", train_out, "Weights output path")->required();
    train->add_option("--epochs", train_config.epochs, "Epochs");
    train->add_option("--lr", train_config.learning_rate, "Learning rate");
    train->add_option("--seed", train_config.seed, "RNG seed");
    train->add_option("--batch", train_config.batch_size, "Batch size");
    train->add_option("--optimizer", optimizer, "adam or sgd")
        ->check(CLI::IsMember({"adam", "sgd"}));
    train->add_option("--loss", loss, "mse or mae")->check(CLI::IsMember({"mse", "mae"}));
    train->add_option("--history", train_history, "Per-epoch loss CSV");
    train->add_option("--report", train_report, "Run report path");
    train->add_option("--init-stddev", init_stddev, "Weight init standard deviation");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Evaluate a trained model on one input");
    std::string pred_model, pred_weights, pred_input;
    predict_cmd->add_option("--model", pred_model, "Model config")->required();
    predict_cmd->add_option("--weights", pred_weights, "Weights path")->required();
    predict_cmd->add_option("--input", pred_input, "Comma-separated input")->required();

    // rollout
    auto* rollout = app.add_subcommand("rollout", "Closed-loop prediction error on a trajectory");
    std::string roll_model, roll_weights, roll_traj, roll_report;
    std::size_t roll_start = 0;
    int roll_horizon = 1;
    rollout->add_option("--model", roll_model, "Model config")->required();
    rollout->add_option("--weights", roll_weights, "Weights path")->required();
    rollout->add_option("--traj", roll_traj, "Trajectory CSV")->required();
    rollout->add_option("--start", roll_start, "Start index");
    rollout->add_option("--horizon", roll_horizon, "Prediction horizon")->required();
    rollout->add_option("--report", roll_report, "Run report path");

    // verify
    auto* verify = app.add_subcommand("verify", "Check that the learned map matches the knowledge");
    std::string ver_model, ver_weights;
    int ver_probes = 50;
    std::uint64_t ver_seed = 0;
    verify->add_option("--model", ver_model, "Model config")->required();
    verify->add_option("--weights", ver_weights, "Weights path")->required();
    verify->add_option("--probes", ver_probes, "Number of random probes");
    verify->add_option("--seed", ver_seed, "RNG seed");

    // correct
    auto* correct = app.add_subcommand("correct", "Closed-form safe command correction");
    std::string cor_safety, cor_bounds, cor_box, cor_u;
    bool cor_revise = false;
    correct->add_option("--safety", cor_safety, "Safety quadratics config")->required();
    correct->add_option("--bounds", cor_bounds, "Safety bounds c1,c2")->required();
    correct->add_option("--box", cor_box, "theta_min,theta_max,gamma_min,gamma_max")->required();
    correct->add_option("--u", cor_u, "Current commands theta,gamma")->required();
    correct->add_flag("--revise", cor_revise, "Verify and revise the quadratics first");

    // complexity
    auto* complexity = app.add_subcommand("complexity", "Monomial counts and parameter accounting");
    int cx_dim = 0, cx_order = 0, cx_terminal = 1;
    std::string cx_orders, cx_dims, cx_dense;
    complexity->add_option("--dim", cx_dim, "Input dimension")->required();
    complexity->add_option("--order", cx_order, "Single-stage order")->required();
    complexity->add_option("--orders", cx_orders, "Cascade orders, comma separated");
    complexity->add_option("--dims", cx_dims, "Intermediate dims, comma separated");
    complexity->add_option("--terminal-out", cx_terminal, "Terminal output dimension");
    complexity->add_option("--dense", cx_dense, "m,n,p of the dense two-layer reference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*augment) return cmd_augment(aug_dim, aug_order, aug_eval, aug_format);
        if (*pendulum) {
            pendulum_params.seed = pen_seed;
            return cmd_simulate_pendulum(pendulum_params, angle_lo, angle_hi, pen_out,
                                         pen_traj_out, pen_model_out, pen_knowledge,
                                         pen_model_order);
        }
        if (*vehicle) {
            vehicle_params.seed = veh_seed;
            return cmd_simulate_vehicle(vehicle_params, parse_vector(veh_initial), veh_out,
                                        veh_traj_out, veh_model_out, veh_model_order);
        }
        if (*train) {
            train_config.optimizer = optimizer == "sgd" ? OptimizerKind::sgd : OptimizerKind::adam;
            train_config.loss = loss == "mae" ? LossKind::mae : LossKind::mse;
            return cmd_train(train_model_path, train_data, train_out, train_history, train_report,
                             train_config, init_stddev);
        }
        if (*predict_cmd) return cmd_predict(pred_model, pred_weights, pred_input);
        if (*rollout)
            return cmd_rollout(roll_model, roll_weights, roll_traj, roll_start, roll_horizon,
                               roll_report);
        if (*verify) return cmd_verify(ver_model, ver_weights, ver_probes, ver_seed);
        if (*correct) return cmd_correct(cor_safety, cor_bounds, cor_box, cor_u, cor_revise);
        if (*complexity)
            return cmd_complexity(cx_dim, cx_order, cx_orders, cx_dims, cx_terminal, cx_dense);
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const FileError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const HashMismatch& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const VersionUnknown& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const DimensionMismatch& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const InvalidArgument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
