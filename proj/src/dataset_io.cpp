#include "sgf/dataset_io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "sgf/error.hpp"

namespace sgf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kFiles[] = {"meta.json", "edges.tsv", "features.tsv", "labels.tsv"};

// Splits into lines on LF; a single trailing LF does not produce an extra line.
std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t end = line.find(sep, start);
        if (end == std::string_view::npos) end = line.size();
        if (end > start) out.push_back(line.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && first != last;
}

}  // namespace

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetFormatError(path.string(), 0, "cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

Dataset load_dataset(const fs::path& dir) {
    const fs::path meta_path = dir / "meta.json";
    json meta;
    try {
        meta = json::parse(read_text(meta_path));
    } catch (const json::parse_error& e) {
        throw DatasetFormatError(meta_path.string(), 0, e.what());
    }
    std::size_t n = 0, d = 0;
    int num_classes = 0;
    Dataset ds;
    try {
        n = meta.at("n").get<std::size_t>();
        d = meta.at("d").get<std::size_t>();
        num_classes = meta.at("num_classes").get<int>();
        ds.name = meta.at("name").get<std::string>();
    } catch (const json::exception& e) {
        throw DatasetFormatError(meta_path.string(), 0, e.what());
    }
    if (num_classes < 1) throw DatasetFormatError(meta_path.string(), 0, "num_classes must be >= 1");
    ds.num_classes = num_classes;

    const std::string edges_file = (dir / "edges.tsv").string();
    std::vector<Edge> edges;
    std::set<Edge> seen;
    const auto edge_lines = split_lines(read_text(edges_file));
    for (std::size_t i = 0; i < edge_lines.size(); ++i) {
        const long line_no = static_cast<long>(i + 1);
        const auto fields = split_fields(edge_lines[i], '\t');
        if (fields.size() != 2)
            throw DatasetFormatError(edges_file, line_no, "expected two tab-separated vertex ids");
        Vertex u = 0, v = 0;
        if (!parse_number(fields[0], u) || !parse_number(fields[1], v))
            throw DatasetFormatError(edges_file, line_no, "vertex id is not a non-negative integer");
        if (u >= n || v >= n)
            throw DatasetFormatError(edges_file, line_no,
                                     "vertex index out of range for n=" + std::to_string(n));
        if (u >= v) throw DatasetFormatError(edges_file, line_no, "expected u < v");
        if (!seen.insert({u, v}).second)
            throw DatasetFormatError(edges_file, line_no, "duplicate edge");
        edges.emplace_back(u, v);
    }
    ds.graph = build_graph(n, edges);

    const std::string feat_file = (dir / "features.tsv").string();
    const auto feat_lines = split_lines(read_text(feat_file));
    if (feat_lines.size() != n)
        throw DatasetFormatError(feat_file, 0, "expected " + std::to_string(n) + " rows, found " +
                                                   std::to_string(feat_lines.size()));
    ds.features = DenseMatrix(n, d);
    for (std::size_t u = 0; u < n; ++u) {
        const long line_no = static_cast<long>(u + 1);
        const auto fields = split_fields(feat_lines[u], ' ');
        if (fields.size() != d)
            throw DatasetFormatError(feat_file, line_no, "expected " + std::to_string(d) +
                                                             " values, found " +
                                                             std::to_string(fields.size()));
        for (std::size_t j = 0; j < d; ++j) {
            double x = 0.0;
            if (!parse_number(fields[j], x))
                throw DatasetFormatError(feat_file, line_no, "malformed number '" +
                                                                 std::string(fields[j]) + "'");
            if (!std::isfinite(x)) throw DatasetFormatError(feat_file, line_no, "non-finite value");
            ds.features(u, j) = x;
        }
    }

    const std::string label_file = (dir / "labels.tsv").string();
    const auto label_lines = split_lines(read_text(label_file));
    if (label_lines.size() != n)
        throw DatasetFormatError(label_file, 0, "expected " + std::to_string(n) + " rows, found " +
                                                    std::to_string(label_lines.size()));
    ds.labels.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        const long line_no = static_cast<long>(u + 1);
        int label = 0;
        if (!parse_number(std::string_view(label_lines[u]), label))
            throw DatasetFormatError(label_file, line_no, "label is not an integer");
        if (label < 0 || label >= num_classes)
            throw DatasetFormatError(label_file, line_no, "label " + std::to_string(label) +
                                                              " outside [0, " +
                                                              std::to_string(num_classes) + ")");
        ds.labels[u] = label;
    }

    try {
        ds.validate();
    } catch (const InvalidInput& e) {
        throw DatasetFormatError(dir.string(), 0, e.what());
    }
    return ds;
}

DatasetManifest save_dataset(const Dataset& dataset, const fs::path& dir) {
    dataset.validate();
    fs::create_directories(dir);
    const std::size_t n = dataset.num_vertices();
    const std::size_t d = dataset.feature_dim();

    json meta;
    meta["n"] = n;
    meta["d"] = d;
    meta["num_classes"] = dataset.num_classes;
    meta["name"] = dataset.name;

    std::string edges;
    for (const auto& [u, v] : dataset.graph.edge_list()) {
        edges += std::to_string(u);
        edges += '\t';
        edges += std::to_string(v);
        edges += '\n';
    }

    std::string features;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t j = 0; j < d; ++j) {
            if (j > 0) features += ' ';
            features += format_double(dataset.features(u, j));
        }
        features += '\n';
    }

    std::string labels;
    for (int y : dataset.labels) {
        labels += std::to_string(y);
        labels += '\n';
    }

    const std::string contents[] = {meta.dump(2) + "\n", edges, features, labels};
    DatasetManifest manifest{dataset.name, n, d, dataset.num_classes, {}};
    for (std::size_t i = 0; i < 4; ++i) {
        write_text(dir / kFiles[i], contents[i]);
        manifest.checksums[kFiles[i]] = sha256_hex(contents[i]);
    }
    return manifest;
}

std::vector<ResultRow> result_rows(const MultiRunResult& result, const std::string& dataset,
                                   double fraction) {
    std::vector<ResultRow> rows;
    for (const RunResult& r : result.runs)
        rows.push_back({to_string(r.variant), dataset, r.seed, fraction, r.test_accuracy,
                        r.val_accuracy, r.best_epoch, r.stop_epoch});
    return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
    std::string out = "variant,dataset,seed,fraction,test_acc,val_acc,best_epoch,stop_epoch\n";
    for (const ResultRow& r : rows) {
        out += r.variant + ',' + r.dataset + ',' + std::to_string(r.seed) + ',' +
               format_double(r.fraction) + ',' + format_double(r.test_acc) + ',' +
               format_double(r.val_acc) + ',' + std::to_string(r.best_epoch) + ',' +
               std::to_string(r.stop_epoch) + '\n';
    }
    return out;
}

std::string trajectory_csv(const std::vector<TrajectorySnapshot>& trajectories) {
    std::string out = "epoch,layer,alpha,beta\n";
    for (const TrajectorySnapshot& t : trajectories)
        for (std::size_t l = 0; l < t.alphas.size(); ++l)
            out += std::to_string(t.epoch) + ',' + std::to_string(l + 1) + ',' +
                   format_double(t.alphas[l]) + ',' + format_double(t.betas[l]) + '\n';
    return out;
}

std::string filter_csv(const std::vector<FilterResponse>& responses) {
    std::string out = "lambda,f_lambda,run_id\n";
    for (const FilterResponse& r : responses)
        for (std::size_t i = 0; i < r.lambdas.size(); ++i)
            out += format_double(r.lambdas[i]) + ',' + format_double(r.values[i]) + ',' +
                   r.run_id + '\n';
    return out;
}

std::string frequency_json(const FrequencyStats& stats) {
    json j;
    j["mean"] = stats.mean;
    j["std"] = stats.std;
    j["per_component"] = stats.per_component;
    return j.dump();
}

const char* to_string(InitMode m) { return m == InitMode::FixedHalf ? "fixed" : "uniform"; }

InitMode parse_init_mode(const std::string& s) {
    if (s == "fixed") return InitMode::FixedHalf;
    if (s == "uniform") return InitMode::UniformPm1;
    throw InvalidInput("unknown init mode '" + s + "' (expected fixed|uniform)");
}

OperatorKind parse_operator_kind(const std::string& s) {
    if (s == "laplacian") return OperatorKind::NormalizedLaplacian;
    if (s == "augmented_adjacency") return OperatorKind::AugmentedAdjacency;
    throw InvalidInput("unknown operator '" + s + "' (expected laplacian|augmented_adjacency)");
}

std::string train_config_json(const TrainConfig& cfg) {
    json j;
    j["lr"] = cfg.lr;
    j["linear_lr_ratio"] = cfg.linear_lr_ratio;
    j["weight_decay"] = cfg.weight_decay;
    j["dropout"] = cfg.dropout;
    j["hidden"] = cfg.hidden;
    j["layers"] = cfg.layers;
    j["max_epochs"] = cfg.max_epochs;
    j["patience"] = cfg.patience;
    j["min_epochs"] = cfg.min_epochs;
    j["init"] = to_string(cfg.init_mode);
    j["variant"] = to_string(cfg.variant);
    j["operator"] = to_string(cfg.operator_kind);
    j["lambda_max"] = cfg.lambda_max;
    j["seed"] = cfg.seed;
    j["log_every"] = cfg.log_every;
    j["sgc_hops"] = cfg.sgc_hops;
    return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text, const TrainConfig& base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw InvalidInput("config: top level must be an object");
    TrainConfig cfg = base;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "lr") cfg.lr = value.get<double>();
            else if (key == "linear_lr_ratio") cfg.linear_lr_ratio = value.get<double>();
            else if (key == "weight_decay") cfg.weight_decay = value.get<double>();
            else if (key == "dropout") cfg.dropout = value.get<double>();
            else if (key == "hidden") cfg.hidden = value.get<std::size_t>();
            else if (key == "layers") cfg.layers = value.get<std::size_t>();
            else if (key == "max_epochs") cfg.max_epochs = value.get<int>();
            else if (key == "patience") cfg.patience = value.get<int>();
            else if (key == "min_epochs") cfg.min_epochs = value.get<int>();
            else if (key == "init") cfg.init_mode = parse_init_mode(value.get<std::string>());
            else if (key == "variant") cfg.variant = parse_variant(value.get<std::string>());
            else if (key == "operator") cfg.operator_kind = parse_operator_kind(value.get<std::string>());
            else if (key == "lambda_max") cfg.lambda_max = value.get<double>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "log_every") cfg.log_every = value.get<int>();
            else if (key == "sgc_hops") cfg.sgc_hops = value.get<int>();
            else throw InvalidInput("config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("config: ") + e.what());
    }
    return cfg;
}

}  // namespace sgf
