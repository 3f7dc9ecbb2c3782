#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "splx/complex.hpp"
#include "splx/data_io.hpp"
#include "splx/training.hpp"

namespace splx {

enum class Task { impute, classify };
Task task_from_name(const std::string& name);
std::string task_name(Task t);

/// Everything an experiment run needs beyond the data itself. `seed`
/// deterministically derives per-repeat, per-order and per-network seeds.
struct TrainConfig {
    Task task = Task::impute;
    Arch arch = Arch::biscnn;
    int layers = 2;
    int j = 1;
    std::size_t filters = 30;
    Activation act = Activation::leaky_relu;
    double missing_rate = 0.1;       // impute
    std::size_t batch = 40;          // classify
    std::size_t iterations = 1000;
    std::size_t repeats = 1;
    std::uint64_t seed = 7;
    /// Adds power-zero taps to snn/scnn layers, the shape the reference
    /// baselines report their parameter counts under.
    bool identity_taps = true;
    bool include_first_norm = false;
    AdamConfig adam;
    std::size_t readout_hidden = 30; // classify
    std::size_t eval_every = 250;    // classify: test-accuracy cadence
    /// classify: stop a repeat once test accuracy reaches this (0 = never).
    double stop_accuracy = 0.0;
    /// Binarization mode used by benchmark forward passes.
    Phase phase = Phase::train;
};

/// Imputation metrics of one order within one repeat. Hidden metrics score
/// only the masked entries; overall metrics score every entry (the known
/// ones are free for the baseline, which keeps them verbatim).
struct ImputationOrderResult {
    int order = 0;
    std::vector<double> loss_curve;
    double hidden_accuracy = 0.0;
    double hidden_baseline = 0.0;
    double overall_accuracy = 0.0;
    double overall_baseline = 0.0;
    std::size_t hidden_count = 0;
    std::size_t entry_count = 0;
    std::size_t parameters = 0;
};

struct ImputationRepeat {
    std::vector<ImputationOrderResult> orders;
    // pooled over orders, weighted by entry counts
    double hidden_accuracy = 0.0;
    double hidden_baseline = 0.0;
    double overall_accuracy = 0.0;
    double overall_baseline = 0.0;
};

struct ImputationSummary {
    std::vector<ImputationRepeat> repeats;
    double mean_hidden_accuracy = 0.0;
    double std_hidden_accuracy = 0.0;
    double mean_hidden_baseline = 0.0;
    double mean_overall_accuracy = 0.0;
    double std_overall_accuracy = 0.0;
    double mean_overall_baseline = 0.0;
    std::size_t parameters = 0; // summed over per-order networks
    double train_seconds = 0.0; // forward+backward only, all repeats
};

/// Accuracy rule for imputation: within 1 percent of the ground truth;
/// zero ground truth requires |pred| <= 1e-6.
bool imputation_hit(double pred, double truth);

/// Trains one independent network per order whose entry in `features` is
/// non-empty, masking cfg.missing_rate of the entries and minimizing l1
/// on the known ones.
ImputationSummary train_imputation(const SimplicialComplex& complex,
                                   const std::vector<Matrix>& features,
                                   const TrainConfig& cfg);

struct ClassificationRepeat {
    std::vector<double> loss_curve;
    std::vector<std::pair<std::size_t, double>> accuracy_curve; // (iteration, percent)
    double final_accuracy = 0.0;
    std::size_t iterations_run = 0;
};

struct ClassificationSummary {
    std::vector<ClassificationRepeat> repeats;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::size_t parameters = 0; // simplicial stack + readout
    double train_seconds = 0.0;
};

/// Trains simplicial layers plus the mean-pool readout on edge flows,
/// batching cfg.batch trajectories per iteration.
ClassificationSummary train_classification(const SimplicialComplex& complex,
                                           const TrajectoryData& data, const TrainConfig& cfg);

struct BenchEntry {
    Arch arch = Arch::biscnn;
    std::size_t parameters = 0;
    double seconds = 0.0;               // forward+backward, warm-up excluded
    double seconds_per_iteration = 0.0;
    double final_loss = 0.0;
    /// Fraction of exactly +1/-1 entries in the matrix each layer actually
    /// multiplies, measured on a post-training forward pass.
    std::vector<double> sign_fractions;
};

struct BenchReport {
    std::vector<BenchEntry> entries;
    std::size_t iterations = 0;
    int order = 0;
    Phase phase = Phase::train;
};

/// Times the imputation training loop of each architecture on identical
/// masked data and seeds. Requires at least two architectures.
BenchReport run_bench(const SimplicialComplex& complex, const Matrix& features, int k,
                      const std::vector<Arch>& archs, const TrainConfig& cfg);

} // namespace splx
