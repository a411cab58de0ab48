#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sgf/dataset.hpp"
#include "sgf/spectral.hpp"
#include "sgf/training.hpp"

namespace sgf {

struct DatasetManifest {
    std::string name;
    std::size_t n = 0;
    std::size_t d = 0;
    int num_classes = 0;
    std::map<std::string, std::string> checksums;  // file name -> sha256 hex
};

/// Reads meta.json, edges.tsv, features.tsv and labels.tsv from `dir`.
/// Malformed content raises DatasetFormatError naming the file and line.
Dataset load_dataset(const std::filesystem::path& dir);

/// Canonical serialization: edges u<v sorted, shortest round-trip floats,
/// LF line endings. Creates `dir` if needed.
DatasetManifest save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

std::string sha256_hex(const std::string& bytes);
std::string format_double(double v);

struct ResultRow {
    std::string variant;
    std::string dataset;
    std::uint64_t seed = 0;
    double fraction = 0.0;
    double test_acc = 0.0;
    double val_acc = 0.0;
    int best_epoch = 0;
    int stop_epoch = 0;
};

std::vector<ResultRow> result_rows(const MultiRunResult& result, const std::string& dataset,
                                   double fraction);

std::string results_csv(const std::vector<ResultRow>& rows);
/// One row per logged (epoch, layer); layers are 1-based.
std::string trajectory_csv(const std::vector<TrajectorySnapshot>& trajectories);
std::string filter_csv(const std::vector<FilterResponse>& responses);
std::string frequency_json(const FrequencyStats& stats);

/// Keys are the TrainConfig field names.
std::string train_config_json(const TrainConfig& cfg);
/// Overlays the keys present in `json` onto `base`; unknown keys are rejected.
TrainConfig train_config_from_json(const std::string& json, const TrainConfig& base);

const char* to_string(InitMode m);
InitMode parse_init_mode(const std::string& s);
OperatorKind parse_operator_kind(const std::string& s);

void write_text(const std::filesystem::path& path, const std::string& contents);
std::string read_text(const std::filesystem::path& path);

}  // namespace sgf
