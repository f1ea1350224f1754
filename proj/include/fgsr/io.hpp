#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fgsr/experiments.hpp"
#include "fgsr/lrmc.hpp"
#include "fgsr/observations.hpp"

namespace fgsr {

inline constexpr const char* kVersion = "0.1.0";

// --- ratings ---------------------------------------------------------------

struct RatingRecord {
    std::uint32_t user = 0;  ///< dense index into RatingsTable::user_ids
    std::uint32_t item = 0;  ///< dense index into RatingsTable::item_ids
    double rating = 0.0;
    bool train = true;
};

struct RatingsTable {
    std::vector<std::int64_t> user_ids;  ///< original id of each dense user index (ascending)
    std::vector<std::int64_t> item_ids;  ///< original id of each dense item index (ascending)
    std::vector<RatingRecord> records;   ///< sorted by (user, item)
    double rating_min = 0.0;
    double rating_max = 0.0;
    std::size_t dropped_items = 0;
    std::size_t dropped_records = 0;

    std::size_t users() const noexcept { return user_ids.size(); }
    std::size_t items() const noexcept { return item_ids.size(); }
    ObservationSet split(bool train) const;
    std::size_t train_count() const noexcept;
};

struct RatingsOptions {
    std::size_t min_ratings_per_item = 5;
    double sample_fraction = 0.7;
    std::uint64_t seed = 0;
};

/// Parses `user item rating [timestamp]` records separated by whitespace, commas or `::`.
/// A non-numeric first line is taken as a header. Items with fewer than
/// min_ratings_per_item ratings are dropped, ids are re-indexed densely, and
/// round(sample_fraction · count) of each user's ratings go to train.
RatingsTable parse_ratings(std::istream& in, const RatingsOptions& options,
                           const std::string& source = "<stream>");
RatingsTable ingest_ratings(const std::filesystem::path& path, const RatingsOptions& options);

// --- result tables ---------------------------------------------------------

/// Delimiter-separated table; cells are kept as their serialized text.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::size_t column_index(std::string_view name) const;
    const std::string& at(std::size_t row, std::string_view column) const;

    friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

/// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double value);
std::string format_number(std::uint64_t value);
double parse_number(const std::string& text);

/// Comma for a .csv extension, tab otherwise.
char delimiter_for(const std::filesystem::path& path);

void write_table(const ResultTable& table, const std::filesystem::path& path);
ResultTable read_table(const std::filesystem::path& path);

/// One row per sweep job with the instance parameters, solver settings and metrics.
ResultTable sweep_table(const SweepSpec& spec, const SweepResult& result);
ResultTable sweep_summary_table(const SweepResult& result);

// --- manifests -------------------------------------------------------------

nlohmann::json config_to_json(const SolverConfig& config);
SolverConfig config_from_json(const nlohmann::json& j, SolverConfig base = {});

struct RunManifest {
    std::string command;
    SolverConfig config;
    std::string dataset_fingerprint;  ///< SHA-256 hex
    std::vector<std::uint64_t> seeds;
    std::string version = kVersion;
    std::string started_at;   ///< ISO-8601 UTC
    std::string finished_at;  ///< ISO-8601 UTC
    double wall_time = 0.0;   ///< seconds
    nlohmann::json details = nlohmann::json::object();

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);
/// Hash of the index set and the 17-digit values of an observation set.
std::string fingerprint(const ObservationSet& omega);
std::string fingerprint(const DenseMatrix& x);

std::string iso8601_now();

std::filesystem::path manifest_path(const std::filesystem::path& results_path);
/// Writes the table to path and the manifest to path + ".manifest.json".
void write_results(const ResultTable& table, const RunManifest& manifest,
                   const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

/// $FGSR_OUT_DIR when set and non-empty, otherwise the working directory.
std::filesystem::path default_output_dir();

}  // namespace fgsr
