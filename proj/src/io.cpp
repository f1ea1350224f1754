#include "fgsr/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <system_error>

#include "fgsr/errors.hpp"
#include "fgsr/random.hpp"

namespace fgsr {

namespace {

bool parse_int(std::string_view s, std::int64_t& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::vector<std::string> ratings_tokens(std::string line) {
    for (std::size_t pos = line.find("::"); pos != std::string::npos; pos = line.find("::", pos))
        line.replace(pos, 2, " ");
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(tok);
    return out;
}

struct RawRating {
    std::int64_t user;
    std::int64_t item;
    double rating;
    std::size_t line;
};

}  // namespace

ObservationSet RatingsTable::split(bool train) const {
    std::vector<Observation> entries;
    for (const auto& r : records)
        if (r.train == train) entries.push_back({r.user, r.item, r.rating});
    return ObservationSet(users(), items(), std::move(entries));
}

std::size_t RatingsTable::train_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const RatingRecord& r) { return r.train; }));
}

RatingsTable parse_ratings(std::istream& in, const RatingsOptions& options,
                           const std::string& source) {
    if (!(options.sample_fraction > 0.0 && options.sample_fraction <= 1.0))
        throw InputError("ingest_ratings: sample fraction must lie in (0, 1]");

    std::vector<RawRating> raw;
    std::string line;
    std::size_t line_no = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto tokens = ratings_tokens(line);
        if (tokens.empty()) continue;
        RawRating r{0, 0, 0.0, line_no};
        const bool ok = tokens.size() >= 3 && tokens.size() <= 4 && parse_int(tokens[0], r.user) &&
                        parse_int(tokens[1], r.item) && parse_real(tokens[2], r.rating) &&
                        std::isfinite(r.rating);
        if (!ok) {
            double probe = 0.0;
            const bool header = !seen_content && !parse_real(tokens[0], probe);
            seen_content = true;
            if (header) continue;
            throw InputError(source + ":" + std::to_string(line_no) +
                             ": expected 'user item rating [timestamp]', got '" + line + "'");
        }
        seen_content = true;
        raw.push_back(r);
    }

    std::sort(raw.begin(), raw.end(), [](const RawRating& a, const RawRating& b) {
        return a.user != b.user ? a.user < b.user : a.item < b.item;
    });
    for (std::size_t k = 1; k < raw.size(); ++k) {
        if (raw[k].user == raw[k - 1].user && raw[k].item == raw[k - 1].item) {
            throw InputError(source + ":" + std::to_string(std::max(raw[k].line, raw[k - 1].line)) +
                             ": duplicate rating for user " + std::to_string(raw[k].user) +
                             ", item " + std::to_string(raw[k].item));
        }
    }

    std::map<std::int64_t, std::size_t> item_counts;
    for (const auto& r : raw) ++item_counts[r.item];
    RatingsTable table;
    std::vector<RawRating> kept;
    for (const auto& r : raw)
        if (item_counts[r.item] >= options.min_ratings_per_item) kept.push_back(r);
    for (const auto& [item, count] : item_counts)
        if (count < options.min_ratings_per_item) ++table.dropped_items;
    table.dropped_records = raw.size() - kept.size();
    if (kept.empty()) throw InputError(source + ": no ratings left after filtering");

    for (const auto& r : kept) {
        table.user_ids.push_back(r.user);
        table.item_ids.push_back(r.item);
    }
    for (auto* ids : {&table.user_ids, &table.item_ids}) {
        std::sort(ids->begin(), ids->end());
        ids->erase(std::unique(ids->begin(), ids->end()), ids->end());
    }
    auto dense = [](const std::vector<std::int64_t>& ids, std::int64_t id) {
        return static_cast<std::uint32_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    table.rating_min = kept.front().rating;
    table.rating_max = kept.front().rating;
    for (const auto& r : kept) {
        table.records.push_back(
            {dense(table.user_ids, r.user), dense(table.item_ids, r.item), r.rating, false});
        table.rating_min = std::min(table.rating_min, r.rating);
        table.rating_max = std::max(table.rating_max, r.rating);
    }

    // Per-user split: a seeded Fisher-Yates shuffle of each user's ratings,
    // the first round(f · count) of which go to train.
    Rng rng = make_rng(options.seed, Stream::RatingsSplit);
    std::size_t begin = 0;
    while (begin < table.records.size()) {
        std::size_t end = begin;
        while (end < table.records.size() && table.records[end].user == table.records[begin].user)
            ++end;
        const std::size_t count = end - begin;
        std::vector<std::size_t> order(count);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t k = count; k > 1; --k) {
            const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k));
            std::swap(order[k - 1], order[std::min(j, k - 1)]);
        }
        const auto take = static_cast<std::size_t>(
            std::llround(options.sample_fraction * static_cast<double>(count)));
        for (std::size_t k = 0; k < std::min(take, count); ++k)
            table.records[begin + order[k]].train = true;
        begin = end;
    }
    return table;
}

RatingsTable ingest_ratings(const std::filesystem::path& path, const RatingsOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ratings file " + path.string());
    return parse_ratings(in, options, path.string());
}

// --- tables ------------------------------------------------------------------

void ResultTable::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) {
        throw DimensionError("ResultTable: row has " + std::to_string(row.size()) +
                             " cells for " + std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
}

std::size_t ResultTable::column_index(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InputError("ResultTable: no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

const std::string& ResultTable::at(std::size_t row, std::string_view column) const {
    return rows.at(row).at(column_index(column));
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string format_number(std::uint64_t value) { return std::to_string(value); }

double parse_number(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    if (!parse_real(text, v)) throw InputError("cannot parse number '" + text + "'");
    return v;
}

char delimiter_for(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? ',' : '\t';
}

void write_table(const ResultTable& table, const std::filesystem::path& path) {
    const char delim = delimiter_for(path);
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (cells[c].find_first_of(std::string{delim, '\n', '\r'}) != std::string::npos)
                throw InputError("write_table: cell '" + cells[c] + "' contains a delimiter");
            if (c > 0) out << delim;
            out << cells[c];
        }
        out << '\n';
    };
    emit(table.columns);
    for (const auto& row : table.rows) emit(row);

    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write " + path.string());
    file << out.str();
    if (!file) throw IoError("write failed for " + path.string());
}

ResultTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const char delim = delimiter_for(path);
    auto split = [delim](const std::string& line) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const std::size_t pos = line.find(delim, start);
            cells.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        return cells;
    };
    ResultTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": missing header row");
    table.columns = split(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        auto cells = split(line);
        if (cells.size() != table.columns.size()) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(table.columns.size()) + " fields");
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

namespace {

std::string to_text(BPenalty p) {
    return p == BPenalty::GroupL2 ? "group_l2" : "half_frobenius_sq";
}

BPenalty b_penalty_from_text(const std::string& s) {
    if (s == "group_l2") return BPenalty::GroupL2;
    if (s == "half_frobenius_sq") return BPenalty::HalfFrobeniusSq;
    throw InputError("unknown b_penalty '" + s + "'");
}

}  // namespace

ResultTable sweep_table(const SweepSpec& spec, const SweepResult& result) {
    ResultTable t;
    t.columns = {"method",    "axis",      "axis_value",  "seed",           "m",
                 "n",         "r",         "missing_rate", "snr",           "density",
                 "snr_c",     "d",         "q",           "alpha",          "beta",
                 "gamma",     "lambda",    "b_penalty",   "rel_tol",        "max_iters",
                 "relative_error", "nmae", "rmse",        "revealed_rank",  "iterations",
                 "converged"};
    for (const auto& row : result.rows) {
        const auto& c = row.config;
        t.add_row({row.method,
                   to_string(row.axis),
                   format_number(row.axis_value),
                   format_number(row.seed),
                   format_number(std::uint64_t{spec.m}),
                   format_number(std::uint64_t{spec.n}),
                   format_number(std::uint64_t{spec.r}),
                   format_number(row.missing_rate),
                   format_number(row.snr),
                   format_number(row.density),
                   format_number(row.snr_c),
                   format_number(std::uint64_t{c.d}),
                   c.q.to_string(),
                   format_number(c.alpha),
                   format_number(c.beta),
                   format_number(c.gamma),
                   c.lambda ? format_number(*c.lambda) : "default",
                   to_text(c.b_penalty),
                   format_number(c.rel_tol),
                   format_number(std::uint64_t{c.max_iters}),
                   format_number(row.metrics.relative_error),
                   format_number(row.metrics.nmae),
                   format_number(row.metrics.rmse),
                   format_number(std::uint64_t{row.metrics.revealed_rank}),
                   format_number(std::uint64_t{row.metrics.iterations}),
                   row.metrics.converged ? "1" : "0"});
    }
    return t;
}

ResultTable sweep_summary_table(const SweepResult& result) {
    ResultTable t;
    t.columns = {"method", "axis_value", "seeds", "mean_relative_error", "std_relative_error"};
    for (const auto& p : result.summary) {
        t.add_row({p.method, format_number(p.axis_value), format_number(std::uint64_t{p.count}),
                   format_number(p.mean_error), format_number(p.std_error)});
    }
    return t;
}

// --- manifests ---------------------------------------------------------------

nlohmann::json config_to_json(const SolverConfig& c) {
    nlohmann::json j;
    j["d"] = c.d;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["gamma"] = c.gamma;
    j["lambda"] = c.lambda ? nlohmann::json(*c.lambda) : nlohmann::json(nullptr);
    j["q"] = c.q.to_string();
    j["b_penalty"] = to_text(c.b_penalty);
    j["mu"] = c.mu ? nlohmann::json(*c.mu) : nlohmann::json(nullptr);
    j["mu_auto_factor"] = c.mu_auto_factor;
    j["mu_growth"] = c.mu_growth;
    j["mu_max_ratio"] = c.mu_max_ratio;
    j["rel_tol"] = c.rel_tol;
    j["max_iters"] = c.max_iters;
    j["prune_tol"] = c.prune_tol;
    j["seed"] = c.seed;
    j["reweight"] = {{"epsilon_start", c.reweight.epsilon_start},
                     {"decay", c.reweight.decay},
                     {"epsilon_min", c.reweight.epsilon_min},
                     {"weight_floor", c.reweight.weight_floor},
                     {"weight_cap", c.reweight.weight_cap}};
    j["step_safety"] = c.step_safety;
    j["backtrack_factor"] = c.backtrack_factor;
    j["divergence_limit"] = c.divergence_limit;
    return j;
}

SolverConfig config_from_json(const nlohmann::json& j, SolverConfig c) {
    if (!j.is_object()) throw InputError("config: expected a JSON object");
    static const std::vector<std::string> known{
        "d",         "alpha",      "beta",    "gamma",       "lambda",      "q",
        "b_penalty", "mu",         "mu_auto_factor", "mu_growth", "mu_max_ratio", "rel_tol",
        "max_iters", "prune_tol",  "seed",    "reweight",    "step_safety", "backtrack_factor",
        "divergence_limit"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw InputError("config: unknown key '" + key + "'");
    }
    try {
        if (j.contains("d")) c.d = j["d"].get<std::size_t>();
        if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
        if (j.contains("beta")) c.beta = j["beta"].get<double>();
        if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
        if (j.contains("lambda")) {
            if (j["lambda"].is_null()) c.lambda.reset();
            else c.lambda = j["lambda"].get<double>();
        }
        if (j.contains("q")) {
            c.q = j["q"].is_string() ? GroupExponent::parse(j["q"].get<std::string>())
                                     : GroupExponent::from_value(j["q"].get<double>());
        }
        if (j.contains("b_penalty")) c.b_penalty = b_penalty_from_text(j["b_penalty"].get<std::string>());
        if (j.contains("mu")) {
            if (j["mu"].is_null()) c.mu.reset();
            else c.mu = j["mu"].get<double>();
        }
        if (j.contains("mu_auto_factor")) c.mu_auto_factor = j["mu_auto_factor"].get<double>();
        if (j.contains("mu_growth")) c.mu_growth = j["mu_growth"].get<double>();
        if (j.contains("mu_max_ratio")) c.mu_max_ratio = j["mu_max_ratio"].get<double>();
        if (j.contains("rel_tol")) c.rel_tol = j["rel_tol"].get<double>();
        if (j.contains("max_iters")) c.max_iters = j["max_iters"].get<std::size_t>();
        if (j.contains("prune_tol")) c.prune_tol = j["prune_tol"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("reweight")) {
            const auto& r = j["reweight"];
            if (r.contains("epsilon_start")) c.reweight.epsilon_start = r["epsilon_start"].get<double>();
            if (r.contains("decay")) c.reweight.decay = r["decay"].get<double>();
            if (r.contains("epsilon_min")) c.reweight.epsilon_min = r["epsilon_min"].get<double>();
            if (r.contains("weight_floor")) c.reweight.weight_floor = r["weight_floor"].get<double>();
            if (r.contains("weight_cap")) c.reweight.weight_cap = r["weight_cap"].get<double>();
        }
        if (j.contains("step_safety")) c.step_safety = j["step_safety"].get<double>();
        if (j.contains("backtrack_factor")) c.backtrack_factor = j["backtrack_factor"].get<double>();
        if (j.contains("divergence_limit")) c.divergence_limit = j["divergence_limit"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return c;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config_to_json(config);
    j["dataset_fingerprint"] = dataset_fingerprint;
    j["seeds"] = seeds;
    j["version"] = version;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["wall_time"] = wall_time;
    j["details"] = details;
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.config = config_from_json(j.at("config"));
        m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
        m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        m.version = j.at("version").get<std::string>();
        m.started_at = j.at("started_at").get<std::string>();
        m.finished_at = j.at("finished_at").get<std::string>();
        m.wall_time = j.at("wall_time").get<double>();
        m.details = j.value("details", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("manifest: ") + e.what());
    }
    return m;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256: digest computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out.push_back(hex[digest[k] >> 4]);
        out.push_back(hex[digest[k] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::string fingerprint(const ObservationSet& omega) {
    std::ostringstream ss;
    ss << omega.rows() << 'x' << omega.cols() << '\n';
    for (const auto& e : omega.entries())
        ss << e.row << ' ' << e.col << ' ' << format_number(e.value) << '\n';
    return sha256_hex(ss.str());
}

std::string fingerprint(const DenseMatrix& x) {
    std::ostringstream ss;
    ss << x.rows() << 'x' << x.cols() << '\n';
    for (double v : x.values()) ss << format_number(v) << '\n';
    return sha256_hex(ss.str());
}

std::string iso8601_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::filesystem::path manifest_path(const std::filesystem::path& results_path) {
    return std::filesystem::path(results_path.string() + ".manifest.json");
}

void write_results(const ResultTable& table, const RunManifest& manifest,
                   const std::filesystem::path& path) {
    write_table(table, path);
    std::ofstream out(manifest_path(path), std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + manifest_path(path).string());
    out << manifest.to_json().dump(2) << '\n';
    if (!out) throw IoError("write failed for " + manifest_path(path).string());
}

RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return RunManifest::from_json(j);
}

std::filesystem::path default_output_dir() {
    const char* env = std::getenv("FGSR_OUT_DIR");
    if (env != nullptr && *env != '\0') return env;
    return std::filesystem::current_path();
}

}  // namespace fgsr
