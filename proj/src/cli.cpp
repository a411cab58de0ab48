#include "sgf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgf/dataset_io.hpp"
#include "sgf/error.hpp"
#include "sgf/generators.hpp"
#include "sgf/spectral.hpp"
#include "sgf/training.hpp"

namespace sgf {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pct(double mean, double sd) { return fixed(100.0 * mean) + " ± " + fixed(100.0 * sd); }

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw InvalidInput("not a number: '" + s + "'");
    return v;
}

// Flags that mirror TrainConfig. Each option records how to copy its value
// into a config so that only explicitly given flags override the file.
class TrainFlags {
public:
    void add_to(CLI::App& app) {
        bind(app.add_option("--lr", flags_.lr, "Learning rate of the filter parameters"),
             [](TrainConfig& c, const TrainConfig& f) { c.lr = f.lr; });
        bind(app.add_option("--linear-lr-ratio", flags_.linear_lr_ratio,
                            "Linear-layer learning rate as a multiple of --lr"),
             [](TrainConfig& c, const TrainConfig& f) { c.linear_lr_ratio = f.linear_lr_ratio; });
        bind(app.add_option("--weight-decay", flags_.weight_decay, "Decoupled weight decay"),
             [](TrainConfig& c, const TrainConfig& f) { c.weight_decay = f.weight_decay; });
        bind(app.add_option("--dropout", flags_.dropout, "Dropout rate on the linear layers"),
             [](TrainConfig& c, const TrainConfig& f) { c.dropout = f.dropout; });
        bind(app.add_option("--hidden", flags_.hidden, "Hidden dimension"),
             [](TrainConfig& c, const TrainConfig& f) { c.hidden = f.hidden; });
        bind(app.add_option("--layers", flags_.layers, "Filter order K"),
             [](TrainConfig& c, const TrainConfig& f) { c.layers = f.layers; });
        bind(app.add_option("--max-epochs", flags_.max_epochs, "Epoch limit"),
             [](TrainConfig& c, const TrainConfig& f) { c.max_epochs = f.max_epochs; });
        bind(app.add_option("--patience", flags_.patience, "Early-stopping patience"),
             [](TrainConfig& c, const TrainConfig& f) { c.patience = f.patience; });
        bind(app.add_option("--min-epochs", flags_.min_epochs, "No early stop before this epoch"),
             [](TrainConfig& c, const TrainConfig& f) { c.min_epochs = f.min_epochs; });
        bind(app.add_option("--init", init_, "Filter initialization: fixed|uniform"),
             [this](TrainConfig& c, const TrainConfig&) { c.init_mode = parse_init_mode(init_); });
        bind(app.add_option("--variant", variant_, "sgf|cheby|horizontal|mlp|sgc"),
             [this](TrainConfig& c, const TrainConfig&) { c.variant = parse_variant(variant_); });
        bind(app.add_option("--operator", operator_, "laplacian|augmented_adjacency"),
             [this](TrainConfig& c, const TrainConfig&) {
                 c.operator_kind = parse_operator_kind(operator_);
             });
        bind(app.add_option("--lambda-max", flags_.lambda_max, "Chebyshev rescaling bound"),
             [](TrainConfig& c, const TrainConfig& f) { c.lambda_max = f.lambda_max; });
        bind(app.add_option("--seed", flags_.seed, "Base seed"),
             [](TrainConfig& c, const TrainConfig& f) { c.seed = f.seed; });
        bind(app.add_option("--log-every", flags_.log_every, "Trajectory logging interval"),
             [](TrainConfig& c, const TrainConfig& f) { c.log_every = f.log_every; });
        bind(app.add_option("--sgc-hops", flags_.sgc_hops, "Propagation steps of the SGC baseline"),
             [](TrainConfig& c, const TrainConfig& f) { c.sgc_hops = f.sgc_hops; });
        app.add_option("--config", config_path_, "JSON file with TrainConfig keys");
    }

    /// defaults < config file < flags
    TrainConfig resolve() const {
        TrainConfig cfg;
        if (!config_path_.empty()) cfg = train_config_from_json(read_text(config_path_), cfg);
        for (const auto& [opt, apply] : bindings_)
            if (opt->count() > 0) apply(cfg, flags_);
        cfg.validate();
        return cfg;
    }

private:
    using Apply = std::function<void(TrainConfig&, const TrainConfig&)>;
    void bind(CLI::Option* opt, Apply apply) { bindings_.emplace_back(opt, std::move(apply)); }

    TrainConfig flags_;
    std::string init_, variant_, operator_, config_path_;
    std::vector<std::pair<CLI::Option*, Apply>> bindings_;
};

void print_config(std::ostream& out, const TrainConfig& cfg) {
    out << "config: " << json::parse(train_config_json(cfg)).dump() << "\n";
}

void print_label_stats(std::ostream& out, const Dataset& ds) {
    const FrequencyStats st = label_frequency(ds.graph, ds.labels, ds.num_classes);
    out << "r(Y)=" << fixed(st.mean) << "±" << fixed(st.std) << "\n";
    out << frequency_json(st) << "\n";
}

void print_checksums(std::ostream& out, const DatasetManifest& m) {
    for (const auto& [file, digest] : m.checksums) out << "sha256 " << file << " " << digest << "\n";
}

int cmd_synth_bipartite(std::size_t per_side, double density, std::size_t feat_dim,
                        std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
    BipartiteInfo info;
    Dataset ds = generate_bipartite(per_side, density, feat_dim, seed, &info);
    const DatasetManifest m = save_dataset(ds, out_dir);
    out << "wrote " << out_dir << ": n=" << m.n << " d=" << m.d << " classes=" << m.num_classes
        << " edges=" << ds.graph.num_edges() << " (sampled " << info.sampled_edges << ", patched "
        << info.patch_edges << ")\n";
    print_label_stats(out, ds);
    print_checksums(out, m);
    return kExitOk;
}

int cmd_synth_blockmodel(std::size_t n, std::size_t k, double p_in, double p_out,
                         std::size_t feat_dim, double signal, std::uint64_t seed,
                         const std::string& out_dir, std::ostream& out) {
    Dataset ds = generate_blockmodel(n, k, p_in, p_out, feat_dim, signal, seed);
    const DatasetManifest m = save_dataset(ds, out_dir);
    out << "wrote " << out_dir << ": n=" << m.n << " d=" << m.d << " classes=" << m.num_classes
        << " edges=" << ds.graph.num_edges() << "\n";
    print_label_stats(out, ds);
    print_checksums(out, m);
    return kExitOk;
}

std::vector<FilterResponse> responses_of(const MultiRunResult& res, const std::string& dataset) {
    std::vector<FilterResponse> out;
    for (const RunResult& r : res.runs) {
        FilterResponse fr = filter_response(r.learned_monomial, 201);
        fr.run_id = std::string(to_string(r.variant)) + "-" + std::to_string(r.seed);
        fr.dataset = dataset;
        fr.accuracy = r.test_accuracy;
        out.push_back(std::move(fr));
    }
    return out;
}

struct TrainOutputs {
    std::string results, metadata, filter, trajectory;
};

int cmd_train(const std::string& data, const TrainConfig& cfg, std::size_t runs, bool grid,
              const TrainOutputs& outputs, std::ostream& out) {
    const Dataset ds = load_dataset(data);
    print_config(out, cfg);

    if (grid) {
        const GridSearchResult gs = grid_search(ds, cfg, HyperGrid{}, runs);
        for (const GridPoint& p : gs.points)
            out << "grid dropout=" << p.cfg.dropout << " wd=" << p.cfg.weight_decay
                << " lr=" << p.cfg.lr << " layers=" << p.cfg.layers
                << " val " << pct(p.result.mean_val, p.result.std_val) << " test "
                << pct(p.result.mean_test, p.result.std_test) << "\n";
        out << "best ";
        print_config(out, gs.points[gs.best].cfg);
        return kExitOk;
    }

    const MultiRunResult res = multi_run(ds, cfg, runs);
    if (!outputs.results.empty())
        write_text(outputs.results, results_csv(result_rows(res, ds.name, 0.0)));
    if (!outputs.metadata.empty()) {
        json meta;
        meta["config"] = json::parse(train_config_json(cfg));
        meta["dataset"] = ds.name;
        meta["runs"] = runs;
        meta["mean_test"] = res.mean_test;
        meta["std_test"] = res.std_test;
        meta["mean_val"] = res.mean_val;
        meta["std_val"] = res.std_val;
        meta["failed_runs"] = res.failed_runs;
        write_text(outputs.metadata, meta.dump(2) + "\n");
    }
    if (!outputs.filter.empty()) write_text(outputs.filter, filter_csv(responses_of(res, ds.name)));
    if (!outputs.trajectory.empty())
        write_text(outputs.trajectory, trajectory_csv(res.runs.front().trajectories));

    for (const RunResult& r : res.runs) {
        out << "run seed=" << r.seed << " test=" << fixed(100.0 * r.test_accuracy)
            << " val=" << fixed(100.0 * r.val_accuracy) << " best_epoch=" << r.best_epoch
            << " stop_epoch=" << r.stop_epoch;
        if (r.diverged) out << " diverged: " << r.failure;
        out << "\n";
    }
    out << to_string(cfg.variant) << " " << ds.name << " test " << pct(res.mean_test, res.std_test)
        << " val " << pct(res.mean_val, res.std_val) << " (" << runs << " runs, "
        << res.failed_runs << " diverged)\n";
    return res.failed_runs > 0 ? kExitDiverged : kExitOk;
}

int cmd_sweep_noise(const std::string& data, const TrainConfig& cfg, const std::string& variants,
                    const std::string& fractions, std::size_t runs, const std::string& out_csv,
                    std::ostream& out) {
    const Dataset ds = load_dataset(data);
    print_config(out, cfg);
    std::vector<Variant> vs;
    for (const std::string& v : split_commas(variants)) vs.push_back(parse_variant(v));
    if (vs.empty()) throw InvalidInput("--variants is empty");
    const std::vector<double> fr = parse_fractions(fractions);

    std::vector<SweepRow> rows = noise_sweep(ds, cfg, vs, fr, runs);
    std::vector<ResultRow> csv_rows;
    for (const SweepRow& row : rows) {
        auto r = result_rows(row.result, ds.name, row.fraction);
        csv_rows.insert(csv_rows.end(), r.begin(), r.end());
    }
    if (!out_csv.empty()) write_text(out_csv, results_csv(csv_rows));

    std::stable_sort(rows.begin(), rows.end(), [&](const SweepRow& a, const SweepRow& b) {
        const auto ia = std::find(vs.begin(), vs.end(), a.variant) - vs.begin();
        const auto ib = std::find(vs.begin(), vs.end(), b.variant) - vs.begin();
        return ia != ib ? ia < ib : a.fraction < b.fraction;
    });
    std::size_t failed = 0;
    for (const SweepRow& row : rows) {
        out << to_string(row.variant) << " fraction=" << format_double(row.fraction)
            << " swaps=" << row.achieved_swaps << " test "
            << pct(row.result.mean_test, row.result.std_test) << "\n";
        failed += row.result.failed_runs;
    }
    return failed > 0 ? kExitDiverged : kExitOk;
}

int cmd_rayleigh(const std::string& data, const std::string& of, std::ostream& out) {
    const Dataset ds = load_dataset(data);
    if (of == "labels")
        out << frequency_json(label_frequency(ds.graph, ds.labels, ds.num_classes)) << "\n";
    else
        out << frequency_json(feature_frequency(ds.graph, ds.features)) << "\n";
    return kExitOk;
}

int cmd_estimate_freq(const std::string& data, double p, std::size_t samples, std::uint64_t seed,
                      std::ostream& out) {
    const Dataset ds = load_dataset(data);
    Rng rng = derive_rng(seed, 0xE571);
    std::vector<double> estimates, naive;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::vector<bool> mask = bernoulli_sample(ds.num_vertices(), p, rng);
        const SampleEstimate e = estimate_label_frequency(ds.graph, ds.labels, ds.num_classes, mask, p);
        estimates.push_back(e.estimate);
        naive.push_back(e.naive);
    }
    auto stats = [](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        return std::pair{mean, std::sqrt(var / static_cast<double>(v.size()))};
    };
    const auto [em, es] = stats(estimates);
    const auto [nm, ns] = stats(naive);
    json j;
    j["train_ratio"] = p;
    j["samples"] = samples;
    j["estimates"] = estimates;
    j["naive"] = naive;
    j["estimate_mean"] = em;
    j["estimate_std"] = es;
    j["naive_mean"] = nm;
    j["naive_std"] = ns;
    j["full_graph"] = label_frequency(ds.graph, ds.labels, ds.num_classes).mean;
    out << j.dump() << "\n";
    return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, double tolerance, std::ostream& out) {
    bool ok = true;
    for (Variant v : {Variant::Sgf, Variant::Cheby, Variant::Horizontal, Variant::Mlp, Variant::Sgc}) {
        const GradCheckReport r = gradcheck_toy(v, seed);
        const bool pass = r.max_rel_error < tolerance;
        ok = ok && pass;
        out << to_string(v) << " max_rel_error=" << r.max_rel_error << (pass ? " PASS" : " FAIL")
            << "\n";
        for (const ParamCheck& c : r.per_parameter)
            out << "  " << c.name << " " << c.max_rel_error << "\n";
    }
    const GradCheckReport corrupted = gradcheck_toy(Variant::Sgf, seed, true);
    const bool flagged = corrupted.max_rel_error >= tolerance;
    ok = ok && flagged;
    out << "self-test corrupted gradient max_rel_error=" << corrupted.max_rel_error
        << (flagged ? " flagged PASS" : " not flagged FAIL") << "\n";
    return ok ? kExitOk : kExitInput;
}

}  // namespace

std::vector<double> parse_fractions(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
        if (parts.size() != 3) throw InvalidInput("fractions range must be start:stop:step");
        const double start = parse_double(parts[0]);
        const double stop = parse_double(parts[1]);
        const double step = parse_double(parts[2]);
        if (!(step > 0.0) || stop < start) throw InvalidInput("fractions range is empty");
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    } else {
        for (const std::string& s : split_commas(spec)) out.push_back(parse_double(s));
    }
    if (out.empty()) throw InvalidInput("no fractions given");
    for (double f : out)
        if (!(f >= 0.0 && f <= 1.0)) throw InvalidInput("fraction outside [0, 1]");
    return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stacked graph filter experiments", "sgf"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth->require_subcommand(1);
    std::string out_dir;
    std::uint64_t synth_seed = 0;
    std::size_t feat_dim = 50;

    auto* bip = synth->add_subcommand("bipartite", "Random connected bipartite graph");
    std::size_t per_side = 1000;
    double density = 0.025;
    bip->add_option("--n-per-side", per_side, "Vertices per side");
    bip->add_option("--density", density, "Cross-pair edge probability");
    bip->add_option("--feat-dim", feat_dim, "Feature dimension");
    bip->add_option("--seed", synth_seed, "Seed");
    bip->add_option("--out", out_dir, "Output directory")->required();

    auto* sbm = synth->add_subcommand("blockmodel", "Planted partition with informative features");
    std::size_t sbm_n = 1000, sbm_k = 5;
    double p_in = 0.05, p_out = 0.002, signal = 1.0;
    sbm->add_option("--n", sbm_n, "Vertices");
    sbm->add_option("--k", sbm_k, "Blocks (classes)");
    sbm->add_option("--p-in", p_in, "Within-block edge probability");
    sbm->add_option("--p-out", p_out, "Between-block edge probability");
    sbm->add_option("--feat-dim", feat_dim, "Feature dimension");
    sbm->add_option("--signal", signal, "Scale of the class means");
    sbm->add_option("--seed", synth_seed, "Seed");
    sbm->add_option("--out", out_dir, "Output directory")->required();

    auto* train = app.add_subcommand("train", "Train a model over several seeds");
    std::string data;
    std::size_t runs = 10;
    bool grid = false;
    TrainOutputs outputs;
    TrainFlags train_flags;
    train->add_option("--data", data, "Dataset directory")->required();
    train->add_option("--runs", runs, "Number of seeds");
    train_flags.add_to(*train);
    train->add_option("--out", outputs.results, "Results CSV");
    train->add_option("--metadata", outputs.metadata, "Run metadata JSON");
    train->add_option("--export-filter", outputs.filter, "Learned filter responses CSV");
    train->add_option("--export-trajectory", outputs.trajectory,
                      "Coefficient trajectory CSV of the first run");
    train->add_flag("--grid", grid, "Hyper-parameter grid search");

    auto* sweep = app.add_subcommand("sweep-noise", "Accuracy under degree-preserving rewiring");
    std::string variants = "sgf,mlp,sgc", fractions = "0.1:0.9:0.1", sweep_out;
    TrainFlags sweep_flags;
    sweep->add_option("--data", data, "Dataset directory")->required();
    sweep->add_option("--variants", variants, "Comma-separated variants");
    sweep->add_option("--fractions", fractions, "start:stop:step or comma list");
    sweep->add_option("--runs", runs, "Number of seeds per point");
    sweep->add_option("--out", sweep_out, "Results CSV");
    sweep_flags.add_to(*sweep);

    auto* rayleigh = app.add_subcommand("rayleigh", "Frequency of labels or features");
    std::string of = "labels";
    rayleigh->add_option("--data", data, "Dataset directory")->required();
    rayleigh->add_option("--of", of, "labels|features")
        ->check(CLI::IsMember({"labels", "features"}));

    auto* estimate = app.add_subcommand("estimate-freq", "Label frequency from sampled vertices");
    double ratio = 0.5;
    std::size_t samples = 10;
    std::uint64_t est_seed = 0;
    estimate->add_option("--data", data, "Dataset directory")->required();
    estimate->add_option("--train-ratio", ratio, "Sampling probability p")->required();
    estimate->add_option("--samples", samples, "Number of samples");
    estimate->add_option("--seed", est_seed, "Seed");

    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of all variants");
    std::uint64_t gc_seed = 0;
    double gc_tol = 1e-4;
    gradcheck->add_option("--seed", gc_seed, "Seed");
    gradcheck->add_option("--tolerance", gc_tol, "Maximum relative error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (bip->parsed())
            return cmd_synth_bipartite(per_side, density, feat_dim, synth_seed, out_dir, out);
        if (sbm->parsed())
            return cmd_synth_blockmodel(sbm_n, sbm_k, p_in, p_out, feat_dim, signal, synth_seed,
                                        out_dir, out);
        if (train->parsed()) {
            if (runs < 1) throw InvalidInput("--runs must be >= 1");
            return cmd_train(data, train_flags.resolve(), runs, grid, outputs, out);
        }
        if (sweep->parsed()) {
            if (runs < 1) throw InvalidInput("--runs must be >= 1");
            return cmd_sweep_noise(data, sweep_flags.resolve(), variants, fractions, runs, sweep_out,
                                   out);
        }
        if (rayleigh->parsed()) return cmd_rayleigh(data, of, out);
        if (estimate->parsed()) {
            if (samples < 1) throw InvalidInput("--samples must be >= 1");
            return cmd_estimate_freq(data, ratio, samples, est_seed, out);
        }
        if (gradcheck->parsed()) return cmd_gradcheck(gc_seed, gc_tol, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    err << app.help();
    return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"sgf"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace sgf
