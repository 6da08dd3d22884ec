#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phytaylor/editing.hpp"
#include "phytaylor/selfcorrect.hpp"
#include "phytaylor/train.hpp"

namespace phytaylor {

// Shortest decimal form that round-trips the exact double.
std::string format_double(double v);

double parse_double(const std::string& token, long line_no);

std::uint64_t fnv1a64(const std::string& text);

// Parsed form of the model config file: dimensions, the three-state
// knowledge grid (number, literal 0, or '*'), and the layer plans.
struct ModelConfig {
    int input_dim = 0;
    int first_order = 0;
    int terminal_out_dim = 0;
    std::vector<std::vector<KnowledgeEntry>> knowledge;
    std::vector<LayerPlan> plan;

    std::string to_text() const;
    static ModelConfig from_text(const std::string& text);

    KnowledgeSpec knowledge_spec() const;
    PhyTaylorModel build() const;
    std::uint64_t hash() const { return fnv1a64(to_text()); }
};

ModelConfig load_model_config(const std::string& path);
void save_model_config(const ModelConfig& config, const std::string& path);

// Versioned full-precision text persistence of the layer parameters (the
// frozen knowledge blocks and the trainable weights). Loading verifies the
// stored config hash against the given one.
void save_weights(const PhyTaylorModel& model, std::uint64_t config_hash,
                  const std::string& path);
void load_weights(PhyTaylorModel& model, std::uint64_t config_hash, const std::string& path);

// CSV of (input, target) rows under a header; rows holding non-finite or
// unparsable values are rejected with their line number.
Dataset load_csv(const std::string& path, int input_dim, int target_dim);
void save_pairs_csv(const Dataset& data, const std::string& path,
                    const std::string& name_prefix = "x");

std::vector<Vec> load_trajectory_csv(const std::string& path, int dim);
void save_trajectory_csv(const std::vector<Vec>& trajectory, const std::string& path,
                         const std::string& name_prefix = "x");

void save_history_csv(const std::vector<EpochRecord>& history, const std::string& path);

// Safety quadratics serialize as (sign, b, P row-major).
std::vector<SafetyQuadratic> load_quadratics(const std::string& path);
void save_quadratics(const std::vector<SafetyQuadratic>& quadratics, const std::string& path);

struct RunReport {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<EpochRecord> history;
    std::optional<double> compliance_max_deviation;
    long compliance_positions = 0;
    int compliance_probes = 0;
    std::vector<double> rollout_errors;

    std::string to_text() const;
};

void save_report(const RunReport& report, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace phytaylor
