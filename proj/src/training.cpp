#include "sgf/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "sgf/error.hpp"
#include "sgf/generators.hpp"

namespace sgf {

void TrainConfig::validate() const {
    auto fail = [](const std::string& what) { throw InvalidInput("TrainConfig: " + what); };
    if (!(lr > 0.0)) fail("lr must be > 0");
    if (!(linear_lr_ratio > 0.0)) fail("linear_lr_ratio must be > 0");
    if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
    if (hidden < 1) fail("hidden must be >= 1");
    if (layers < 1) fail("layers must be >= 1");
    if (max_epochs < 1) fail("max_epochs must be >= 1");
    if (patience < 1 || patience >= max_epochs) fail("patience must be in [1, max_epochs)");
    if (min_epochs < 0) fail("min_epochs must be >= 0");
    if (!(lambda_max > 0.0)) fail("lambda_max must be > 0");
    if (log_every < 1) fail("log_every must be >= 1");
    if (sgc_hops < 0) fail("sgc_hops must be >= 0");
    if (operator_kind == OperatorKind::ScaledChebyshevBase)
        fail("operator_kind must be laplacian or augmented_adjacency");
}

ModelSpec TrainConfig::model_spec() const {
    ModelSpec s;
    s.variant = variant;
    s.hidden = hidden;
    s.layers = layers;
    s.operator_kind = operator_kind;
    s.lambda_max = lambda_max;
    s.init = init_mode;
    s.sgc_hops = sgc_hops;
    return s;
}

void adam_step(std::span<Parameter* const> params, std::vector<AdamMoments>& moments,
               const TrainConfig& cfg, long t) {
    if (t < 1) throw InvalidInput("adam_step: t must be >= 1");
    if (moments.size() != params.size()) {
        moments.clear();
        for (Parameter* p : params)
            moments.push_back({DenseMatrix(p->value.rows(), p->value.cols()),
                               DenseMatrix(p->value.rows(), p->value.cols())});
    }
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        AdamMoments& mom = moments[k];
        const double lr = p.group == ParamGroup::Filter ? cfg.lr : cfg.lr * cfg.linear_lr_ratio;
        const double decay = p.decay ? cfg.weight_decay : 0.0;
        auto& value = p.value.data();
        const auto& grad = p.grad.data();
        auto& m = mom.m.data();
        auto& v = mom.v.data();
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g;
            v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            value[i] -= lr * (mhat / (std::sqrt(vhat) + kAdamEps) + decay * value[i]);
        }
    }
}

bool EarlyStopper::observe(int epoch, double val_acc) {
    if (val_acc > best_) {
        best_ = val_acc;
        best_epoch_ = epoch;
        return true;
    }
    return false;
}

namespace {

TrajectorySnapshot trajectory_at(int epoch, const Model& model) {
    auto [a, b] = model.filter_scalars();
    return {epoch, std::move(a), std::move(b)};
}

// Forward in eval mode. A non-finite forward degrades to all-zero logits,
// i.e. every vertex predicted as class 0.
DenseMatrix eval_logits(Model& model, std::size_t n, std::size_t classes, bool& finite) {
    Rng unused(0);
    try {
        finite = true;
        return model.forward({0.0, false}, unused);
    } catch (const NumericalDivergence&) {
        finite = false;
        return DenseMatrix(n, classes);
    }
}

}  // namespace

RunResult train(const Dataset& dataset, const GraphOperators& ops, const Split& split,
                const TrainConfig& cfg) {
    cfg.validate();
    dataset.validate();
    split.validate(dataset.labels, dataset.num_classes);
    if (ops.laplacian().n != dataset.num_vertices())
        throw InvalidInput("train: operators were built for a different graph");

    const auto n = dataset.num_vertices();
    const auto classes = static_cast<std::size_t>(dataset.num_classes);
    DenseMatrix sgc_features;
    const DenseMatrix* inputs = &dataset.features;
    if (cfg.variant == Variant::Sgc) {
        sgc_features = sgc_precompute(ops.augmented(), dataset.features, cfg.sgc_hops);
        inputs = &sgc_features;
    }

    Rng init_rng = derive_rng(cfg.seed, 0x5EED0001);
    Rng dropout_rng = derive_rng(cfg.seed, 0x5EED0002);
    Model model(cfg.model_spec(), ops, *inputs, classes, init_rng);
    auto params = model.parameters();
    std::vector<AdamMoments> moments;

    RunResult result;
    result.variant = cfg.variant;
    result.seed = cfg.seed;
    result.trajectories.push_back(trajectory_at(0, model));

    EarlyStopper stopper(cfg.patience, cfg.min_epochs);
    std::vector<DenseMatrix> best = model.snapshot();
    std::vector<DenseMatrix> last_finite = best;
    const ForwardOptions train_opt{cfg.dropout, true};

    int epoch = 1;
    for (; epoch <= cfg.max_epochs; ++epoch) {
        try {
            last_finite = model.snapshot();
            model.zero_grad();
            const DenseMatrix logits = model.forward(train_opt, dropout_rng);
            const LossResult loss = nll_loss(logits, dataset.labels, split.train);
            if (!std::isfinite(loss.loss)) throw NumericalDivergence("loss at epoch", epoch);
            model.backward(loss.dlogits);
            adam_step(params, moments, cfg, epoch);
            result.loss_curve.push_back(loss.loss);

            Rng unused(0);
            const DenseMatrix eval = model.forward({0.0, false}, unused);
            if (stopper.observe(epoch, accuracy(eval, dataset.labels, split.val)))
                best = model.snapshot();
        } catch (const NumericalDivergence& e) {
            result.diverged = true;
            result.failure = e.what();
            break;
        }
        if (epoch % cfg.log_every == 0) result.trajectories.push_back(trajectory_at(epoch, model));
        if (stopper.should_stop(epoch)) break;
    }
    result.stop_epoch = std::min(epoch, cfg.max_epochs);
    result.best_epoch = stopper.best_epoch();

    // diverged runs report the last parameters that still evaluated finitely
    model.restore(result.diverged ? last_finite : best);
    bool finite = true;
    const DenseMatrix eval = eval_logits(model, n, classes, finite);
    result.test_accuracy = accuracy(eval, dataset.labels, split.test);
    result.val_accuracy = accuracy(eval, dataset.labels, split.val);
    result.train_accuracy = accuracy(eval, dataset.labels, split.train);
    result.learned_monomial = model.learned_filter();
    return result;
}

RunResult train(const Dataset& dataset, const Split& split, const TrainConfig& cfg) {
    const GraphOperators ops(dataset.graph);
    return train(dataset, ops, split, cfg);
}

std::size_t worker_count() {
    if (const char* env = std::getenv("SGF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

void aggregate(MultiRunResult& agg) {
    std::sort(agg.runs.begin(), agg.runs.end(),
              [](const RunResult& a, const RunResult& b) { return a.seed < b.seed; });
    const auto k = static_cast<double>(agg.runs.size());
    for (const RunResult& r : agg.runs) {
        agg.mean_test += r.test_accuracy;
        agg.mean_val += r.val_accuracy;
        agg.failed_runs += r.diverged ? 1 : 0;
    }
    agg.mean_test /= k;
    agg.mean_val /= k;
    for (const RunResult& r : agg.runs) {
        agg.std_test += (r.test_accuracy - agg.mean_test) * (r.test_accuracy - agg.mean_test);
        agg.std_val += (r.val_accuracy - agg.mean_val) * (r.val_accuracy - agg.mean_val);
    }
    agg.std_test = std::sqrt(agg.std_test / k);
    agg.std_val = std::sqrt(agg.std_val / k);
}

}  // namespace

MultiRunResult multi_run(const Dataset& dataset, const GraphOperators& ops, const TrainConfig& cfg,
                         std::size_t n_runs) {
    if (n_runs < 1) throw InvalidInput("multi_run: n_runs must be >= 1");
    cfg.validate();
    MultiRunResult agg;
    agg.runs.resize(n_runs);
    parallel_for(n_runs, [&](std::size_t i) {
        TrainConfig run_cfg = cfg;
        run_cfg.seed = cfg.seed + i;
        const Split split = stratified_split(dataset.labels, dataset.num_classes, run_cfg.seed);
        agg.runs[i] = train(dataset, ops, split, run_cfg);
    });
    aggregate(agg);
    return agg;
}

MultiRunResult multi_run(const Dataset& dataset, const TrainConfig& cfg, std::size_t n_runs) {
    const GraphOperators ops(dataset.graph);
    return multi_run(dataset, ops, cfg, n_runs);
}

std::uint64_t rewire_seed(std::uint64_t base_seed, std::size_t index) {
    return splitmix64(base_seed + 0x4E015E00ULL + index);
}

std::vector<SweepRow> noise_sweep(const Dataset& dataset, const TrainConfig& cfg,
                                  std::span<const Variant> variants,
                                  std::span<const double> fractions, std::size_t n_runs) {
    std::vector<SweepRow> rows;
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        const RewireResult rw = degree_preserving_rewire(dataset.graph, fractions[fi],
                                                         rewire_seed(cfg.seed, fi));
        Dataset noisy = dataset;
        noisy.graph = rw.graph;
        const GraphOperators ops(noisy.graph);
        for (Variant v : variants) {
            TrainConfig run_cfg = cfg;
            run_cfg.variant = v;
            rows.push_back({v, fractions[fi], rw.achieved_swaps, multi_run(noisy, ops, run_cfg, n_runs)});
        }
    }
    return rows;
}

GradCheckReport gradcheck_toy(Variant variant, std::uint64_t seed, bool corrupt) {
    constexpr std::size_t n = 12, d = 5, classes = 3;
    Rng rng = derive_rng(seed, 0x6C0C);
    std::vector<Edge> edges;
    for (Vertex u = 0; u < n; ++u) edges.emplace_back(u, (u + 1) % n);
    std::bernoulli_distribution extra(0.2);
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 2; v < n; ++v)
            if (extra(rng)) edges.emplace_back(u, v);
    const Graph g = build_graph(n, edges);
    const GraphOperators ops(g);

    std::normal_distribution<double> gauss;
    DenseMatrix x(n, d);
    for (double& v : x.data()) v = gauss(rng);
    std::vector<int> labels(n);
    for (std::size_t u = 0; u < n; ++u) labels[u] = static_cast<int>(u % classes);
    const std::vector<bool> mask(n, true);

    ModelSpec spec;
    spec.variant = variant;
    spec.hidden = 8;
    spec.layers = 3;
    spec.lambda_max = 2.0;
    spec.init = InitMode::UniformPm1;
    const DenseMatrix inputs = variant == Variant::Sgc ? sgc_precompute(ops.augmented(), x, 2) : x;
    Rng init_rng = derive_rng(seed, 0x6C0D);
    Model model(spec, ops, inputs, classes, init_rng);
    auto params = model.parameters();

    const ForwardOptions opt{0.3, true};
    const std::uint64_t mask_seed = seed ^ 0xD60F;
    auto loss = [&] {
        Rng r(mask_seed);
        return nll_loss(model.forward(opt, r), labels, mask).loss;
    };
    auto grads = [&] {
        Rng r(mask_seed);
        const LossResult l = nll_loss(model.forward(opt, r), labels, mask);
        model.backward(l.dlogits);
        if (corrupt) params.front()->grad.data()[0] += 0.05;
    };
    return finite_difference_check(loss, grads, params);
}

GridSearchResult grid_search(const Dataset& dataset, const TrainConfig& base, const HyperGrid& grid,
                             std::size_t n_runs) {
    if (grid.size() == 0) throw InvalidInput("grid_search: empty grid");
    const GraphOperators ops(dataset.graph);
    GridSearchResult out;
    for (double dropout : grid.dropout)
        for (double wd : grid.weight_decay)
            for (double lr : grid.lr)
                for (std::size_t layers : grid.layers) {
                    TrainConfig cfg = base;
                    cfg.dropout = dropout;
                    cfg.weight_decay = wd;
                    cfg.lr = lr;
                    cfg.layers = layers;
                    out.points.push_back({cfg, multi_run(dataset, ops, cfg, n_runs)});
                }
    for (std::size_t i = 1; i < out.points.size(); ++i)
        if (out.points[i].result.mean_val > out.points[out.best].result.mean_val) out.best = i;
    return out;
}

}  // namespace sgf
