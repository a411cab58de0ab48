#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgf/dataset.hpp"
#include "sgf/filters.hpp"
#include "sgf/nn.hpp"
#include "sgf/spectral.hpp"

namespace sgf {

struct TrainConfig {
    double lr = 0.01;
    double linear_lr_ratio = 0.25;
    double weight_decay = 5e-4;
    double dropout = 0.7;
    std::size_t hidden = 64;
    std::size_t layers = 16;
    int max_epochs = 2000;
    int patience = 100;
    int min_epochs = 600;  // early stopping is disabled before this epoch
    InitMode init_mode = InitMode::FixedHalf;
    Variant variant = Variant::Sgf;
    OperatorKind operator_kind = OperatorKind::AugmentedAdjacency;
    double lambda_max = 2.0;
    std::uint64_t seed = 0;
    int log_every = 20;
    int sgc_hops = 2;

    /// Throws InvalidInput on out-of-range values.
    void validate() const;
    ModelSpec model_spec() const;
};

// ---------------------------------------------------------------------------
// Optimizer

struct AdamMoments {
    DenseMatrix m;
    DenseMatrix v;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One Adam step (t >= 1). Filter-group parameters use cfg.lr, linear-group
/// parameters cfg.lr·linear_lr_ratio. Parameters with `decay` set also get
/// decoupled weight decay p -= lr_group·weight_decay·p.
void adam_step(std::span<Parameter* const> params, std::vector<AdamMoments>& moments,
               const TrainConfig& cfg, long t);

// ---------------------------------------------------------------------------

/// Tracks the best validation accuracy (strict improvement). Stopping is
/// signalled once `patience` epochs pass without one, but never before
/// `min_epochs`.
class EarlyStopper {
public:
    EarlyStopper(int patience, int min_epochs = 0) : patience_(patience), min_epochs_(min_epochs) {}

    /// Returns true when `val_acc` is a new best.
    bool observe(int epoch, double val_acc);
    bool should_stop(int epoch) const noexcept {
        return epoch >= min_epochs_ && epoch - best_epoch_ >= patience_;
    }

    double best_value() const noexcept { return best_; }
    int best_epoch() const noexcept { return best_epoch_; }

private:
    int patience_;
    int min_epochs_;
    double best_ = -1.0;
    int best_epoch_ = 0;
};

struct TrajectorySnapshot {
    int epoch = 0;
    std::vector<double> alphas;
    std::vector<double> betas;
};

struct RunResult {
    Variant variant = Variant::Sgf;
    std::uint64_t seed = 0;
    double test_accuracy = 0.0;
    double val_accuracy = 0.0;
    double train_accuracy = 0.0;
    int best_epoch = 0;
    int stop_epoch = 0;
    std::vector<double> loss_curve;
    std::vector<TrajectorySnapshot> trajectories;
    MonomialFilter learned_monomial;
    bool diverged = false;
    std::string failure;
};

/// Full-batch training; test accuracy is measured on the best-validation
/// parameters. `ops` must be built from dataset.graph.
RunResult train(const Dataset& dataset, const GraphOperators& ops, const Split& split,
                const TrainConfig& cfg);
RunResult train(const Dataset& dataset, const Split& split, const TrainConfig& cfg);

struct MultiRunResult {
    double mean_test = 0.0;
    double std_test = 0.0;  // population
    double mean_val = 0.0;
    double std_val = 0.0;
    std::size_t failed_runs = 0;
    std::vector<RunResult> runs;  // ordered by seed
};

/// Number of worker threads: SGF_THREADS if set, else hardware concurrency.
std::size_t worker_count();

/// Run i uses seed cfg.seed + i for both its stratified split and its init.
MultiRunResult multi_run(const Dataset& dataset, const TrainConfig& cfg, std::size_t n_runs);
MultiRunResult multi_run(const Dataset& dataset, const GraphOperators& ops, const TrainConfig& cfg,
                         std::size_t n_runs);

struct SweepRow {
    Variant variant = Variant::Sgf;
    double fraction = 0.0;
    std::size_t achieved_swaps = 0;
    MultiRunResult result;
};

/// Seed used to rewire at fraction index `index` of a sweep.
std::uint64_t rewire_seed(std::uint64_t base_seed, std::size_t index);

/// For each fraction: rewire (degree preserving), then multi_run each
/// variant. Rows ordered by (fraction, variant order given).
std::vector<SweepRow> noise_sweep(const Dataset& dataset, const TrainConfig& cfg,
                                  std::span<const Variant> variants,
                                  std::span<const double> fractions, std::size_t n_runs);

/// Finite-difference check of one variant on a fixed toy problem
/// (n=12, d=5, hidden=8, K=3, 3 classes, dropout on with a frozen mask).
/// `corrupt` perturbs one analytic gradient entry to exercise detection.
GradCheckReport gradcheck_toy(Variant variant, std::uint64_t seed, bool corrupt = false);

/// Hyper-parameter search sets; defaults are the standard search grid.
struct HyperGrid {
    std::vector<double> dropout{0.4, 0.5, 0.6, 0.7, 0.8};
    std::vector<double> weight_decay{1e-2, 1e-3, 5e-4, 1e-4, 5e-5};
    std::vector<double> lr{0.001, 0.01, 0.02, 0.1};
    std::vector<std::size_t> layers{4, 8, 16, 32, 64};

    std::size_t size() const noexcept {
        return dropout.size() * weight_decay.size() * lr.size() * layers.size();
    }
};

struct GridPoint {
    TrainConfig cfg;
    MultiRunResult result;
};

struct GridSearchResult {
    std::vector<GridPoint> points;
    std::size_t best = 0;  // highest mean validation accuracy; first wins ties
};

GridSearchResult grid_search(const Dataset& dataset, const TrainConfig& base, const HyperGrid& grid,
                             std::size_t n_runs);

}  // namespace sgf
