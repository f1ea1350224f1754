// fgsr: command-line driver for the completion, RPCA, sweep and verification runs.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "fgsr/errors.hpp"
#include "fgsr/experiments.hpp"
#include "fgsr/io.hpp"
#include "fgsr/lrmc.hpp"
#include "fgsr/rpca.hpp"
#include "fgsr/verify.hpp"

namespace fs = std::filesystem;
using namespace fgsr;

namespace {

struct SyntheticShape {
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t r = 0;
};

SyntheticShape parse_synthetic(const std::string& text) {
    static const std::regex pattern(R"((\d+)[xX](\d+):[rR](\d+))");
    std::smatch match;
    if (!std::regex_match(text, match, pattern))
        throw InputError("--synthetic expects MxN:rR (for example 200x200:r20), got '" + text + "'");
    return {std::stoul(match[1]), std::stoul(match[2]), std::stoul(match[3])};
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        if (item.empty()) continue;
        // d and q values may be written as fractions such as 1/4.
        const auto slash = item.find('/');
        if (slash != std::string::npos) {
            out.push_back(parse_number(item.substr(0, slash)) / parse_number(item.substr(slash + 1)));
        } else {
            out.push_back(parse_number(item));
        }
    }
    if (out.empty()) throw InputError("empty value list '" + text + "'");
    return out;
}

std::vector<std::string> split_names(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

/// Solver flags shared by every run subcommand. Values are applied on top of
/// the defaults and any --config file only when the flag was given.
struct SolverFlags {
    std::string config_path;
    std::size_t d = 0;
    std::string q;
    double alpha = 0;
    double beta = 0;
    double gamma = 0;
    double lambda = 0;
    double tol = 0;
    std::size_t max_iters = 0;
    std::uint64_t seed = 0;

    CLI::Option* o_d = nullptr;
    CLI::Option* o_q = nullptr;
    CLI::Option* o_alpha = nullptr;
    CLI::Option* o_beta = nullptr;
    CLI::Option* o_gamma = nullptr;
    CLI::Option* o_lambda = nullptr;
    CLI::Option* o_tol = nullptr;
    CLI::Option* o_max_iters = nullptr;
    CLI::Option* o_seed = nullptr;

    void attach(CLI::App* app, bool with_lambda) {
        app->add_option("--config", config_path, "JSON file with solver settings")
            ->check(CLI::ExistingFile);
        o_d = app->add_option("--d", d, "initial factor width (default |Omega|/(m+n))");
        o_q = app->add_option("--q", q, "group exponent: 1, 1/2, 1/4 or 1/8");
        o_alpha = app->add_option("--alpha", alpha, "weight of the B penalty");
        o_beta = app->add_option("--beta", beta, "data weight of the noisy model");
        o_gamma = app->add_option("--gamma", gamma, "regularization weight");
        if (with_lambda) o_lambda = app->add_option("--lambda", lambda, "l1 weight of the sparse part");
        o_tol = app->add_option("--tol", tol, "relative-change stopping tolerance (default 1e-5)");
        o_max_iters = app->add_option("--max-iters", max_iters, "iteration limit (default 1000)");
        o_seed = app->add_option("--seed", seed, "random seed (default 0)");
    }

    SolverConfig resolve() const {
        SolverConfig c;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw InputError(config_path + ": " + e.what());
            }
            c = config_from_json(j, c);
        }
        if (o_d->count()) c.d = d;
        if (o_q->count()) c.q = GroupExponent::parse(q);
        if (o_alpha->count()) c.alpha = alpha;
        if (o_beta->count()) c.beta = beta;
        if (o_gamma->count()) c.gamma = gamma;
        if (o_lambda && o_lambda->count()) c.lambda = lambda;
        if (o_tol->count()) c.rel_tol = tol;
        if (o_max_iters->count()) c.max_iters = max_iters;
        if (o_seed->count()) c.seed = seed;
        c.validate();
        return c;
    }
};

fs::path output_path(const std::string& out, const std::string& stem) {
    if (!out.empty()) return out;
    return default_output_dir() / (stem + ".tsv");
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) s += ' ';
        s += argv[i];
    }
    return s;
}

void print_report(const ResultTable& table, const fs::path& path) {
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        std::cout << table.columns[c] << ": " << table.rows.front()[c] << '\n';
    std::cout << "results: " << path.string() << '\n';
    std::cout << "manifest: " << manifest_path(path).string() << '\n';
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string u(std::size_t v) { return format_number(std::uint64_t{v}); }

// --- complete ------------------------------------------------------------------

struct CompleteArgs {
    std::string synthetic;
    std::string ratings;
    double missing = 0.5;
    std::string snr = "inf";
    std::string method;
    double sample = 0.7;
    std::size_t min_item_ratings = 5;
    std::string out;
    SolverFlags flags;
};

int run_complete(const CompleteArgs& args, const std::string& command) {
    const auto t0 = Clock::now();
    RunManifest manifest;
    manifest.command = command;
    manifest.started_at = iso8601_now();
    SolverConfig config = args.flags.resolve();
    require_method(ProblemKind::Completion, args.method);

    ResultTable table;
    if (!args.synthetic.empty()) {
        const SyntheticShape shape = parse_synthetic(args.synthetic);
        const double snr = parse_number(args.snr);
        const LrmcInstance inst =
            gen_lrmc_instance(shape.m, shape.n, shape.r, args.missing, snr, config.seed);
        const RecoveryResult res =
            run_completion_method(args.method, inst.omega, config, !std::isfinite(snr));
        const MetricsReport metrics = lrmc_metrics(inst, res, seconds_since(t0));

        table.columns = {"method", "m", "n", "r", "missing_rate", "snr", "seed", "observed",
                         "d", "q", "alpha", "beta", "gamma", "rel_tol", "max_iters",
                         "relative_error", "nmae", "rmse", "revealed_rank", "iterations",
                         "converged", "final_rel_change"};
        const std::size_t d = config.d > 0 ? config.d : default_rank_heuristic(inst.omega);
        table.add_row({args.method, u(shape.m), u(shape.n), u(shape.r),
                       format_number(args.missing), format_number(snr), format_number(config.seed),
                       u(inst.omega.size()), u(d), config.q.to_string(),
                       format_number(config.alpha), format_number(config.beta),
                       format_number(config.gamma), format_number(config.rel_tol),
                       u(config.max_iters), format_number(metrics.relative_error),
                       format_number(metrics.nmae), format_number(metrics.rmse),
                       u(metrics.revealed_rank), u(metrics.iterations),
                       metrics.converged ? "1" : "0",
                       format_number(res.rel_change_trace.empty() ? 0.0
                                                                  : res.rel_change_trace.back())});
        manifest.dataset_fingerprint = fingerprint(inst.omega);
        manifest.details = {{"kind", "synthetic"},
                            {"m", shape.m},
                            {"n", shape.n},
                            {"r", shape.r},
                            {"missing_rate", args.missing},
                            {"snr", format_number(snr)}};
    } else {
        RatingsOptions ro;
        ro.min_ratings_per_item = args.min_item_ratings;
        ro.sample_fraction = args.sample;
        ro.seed = config.seed;
        const RatingsTable ratings = ingest_ratings(args.ratings, ro);
        const ObservationSet train = ratings.split(true);
        const ObservationSet test = ratings.split(false);
        if (train.empty()) throw InputError("ratings: the training split is empty");
        const RecoveryResult res = run_completion_method(args.method, train, config, false);

        double nmae_v = 0.0;
        double rmse_v = 0.0;
        double rel = 0.0;
        if (!test.empty()) {
            std::vector<double> pred(test.size());
            for (std::size_t e = 0; e < test.size(); ++e) {
                const auto& t = test.entries()[e];
                pred[e] = std::clamp(res.x_hat(t.row, t.col), ratings.rating_min, ratings.rating_max);
            }
            const ObservationSet predictions = test.with_values(pred);
            const double top = ratings.rating_max > ratings.rating_min
                                     ? ratings.rating_max
                                     : ratings.rating_min + 1.0;
            nmae_v = nmae(predictions, test, ratings.rating_min, top);
            rmse_v = rmse(predictions, test, ratings.rating_min, top);
            double num = 0.0;
            double den = 0.0;
            for (std::size_t e = 0; e < test.size(); ++e) {
                const double dv = pred[e] - test.entries()[e].value;
                num += dv * dv;
                den += test.entries()[e].value * test.entries()[e].value;
            }
            rel = den > 0.0 ? std::sqrt(num / den) : 0.0;
        }
        table.columns = {"method", "users", "items", "train", "test", "sample", "min_item_ratings",
                         "rating_min", "rating_max", "seed", "d", "q", "alpha", "beta", "gamma",
                         "rel_tol", "max_iters", "relative_error", "nmae", "rmse",
                         "revealed_rank", "iterations", "converged"};
        const std::size_t d = config.d > 0 ? config.d : default_rank_heuristic(train);
        table.add_row({args.method, u(ratings.users()), u(ratings.items()), u(train.size()),
                       u(test.size()), format_number(args.sample), u(args.min_item_ratings),
                       format_number(ratings.rating_min), format_number(ratings.rating_max),
                       format_number(config.seed), u(d), config.q.to_string(),
                       format_number(config.alpha), format_number(config.beta),
                       format_number(config.gamma), format_number(config.rel_tol),
                       u(config.max_iters), format_number(rel), format_number(nmae_v),
                       format_number(rmse_v), u(res.revealed_rank), u(res.iterations),
                       res.converged ? "1" : "0"});
        manifest.dataset_fingerprint = sha256_file(args.ratings);
        manifest.details = {{"kind", "ratings"},
                            {"source", args.ratings},
                            {"user_ids", ratings.user_ids},
                            {"item_ids", ratings.item_ids},
                            {"dropped_items", ratings.dropped_items},
                            {"dropped_records", ratings.dropped_records}};
    }

    manifest.config = config;
    manifest.seeds = {config.seed};
    manifest.finished_at = iso8601_now();
    manifest.wall_time = seconds_since(t0);
    const fs::path path = output_path(args.out, "complete_" + args.method);
    write_results(table, manifest, path);
    print_report(table, path);
    return 0;
}

// --- rpca ----------------------------------------------------------------------

struct RpcaArgs {
    std::string synthetic;
    double density = 0.2;
    double snrc = 1.0;
    std::string method;
    std::string out;
    SolverFlags flags;
};

int run_rpca_cmd(const RpcaArgs& args, const std::string& command) {
    const auto t0 = Clock::now();
    RunManifest manifest;
    manifest.command = command;
    manifest.started_at = iso8601_now();
    SolverConfig config = args.flags.resolve();
    require_method(ProblemKind::Rpca, args.method);
    const SyntheticShape shape = parse_synthetic(args.synthetic);
    if (config.d == 0) config.d = std::min(shape.m, shape.n) / 2 > 0 ? std::min(shape.m, shape.n) / 2 : 1;

    const RpcaInstance inst =
        gen_rpca_instance(shape.m, shape.n, shape.r, args.density, args.snrc, config.seed);
    const DenseMatrix m_e = inst.observed();
    const RpcaResult res = run_rpca_method(args.method, m_e, config);
    const MetricsReport metrics = rpca_metrics(inst, res, seconds_since(t0));

    std::size_t nnz = 0;
    double l1 = 0.0;
    for (double v : res.sparse.values()) {
        if (v != 0.0) ++nnz;
        l1 += std::abs(v);
    }
    const double lambda =
        config.lambda.value_or(1.0 / std::sqrt(static_cast<double>(std::max(shape.m, shape.n))));

    ResultTable table;
    table.columns = {"method", "m", "n", "r", "density", "snr_c", "seed", "d", "q", "alpha",
                     "gamma", "lambda", "rel_tol", "max_iters", "relative_error",
                     "sparse_nonzero_fraction", "sparse_l1", "primal_residual", "revealed_rank",
                     "iterations", "converged"};
    table.add_row({args.method, u(shape.m), u(shape.n), u(shape.r), format_number(args.density),
                   format_number(args.snrc), format_number(config.seed), u(config.d),
                   config.q.to_string(), format_number(config.alpha), format_number(config.gamma),
                   format_number(lambda), format_number(config.rel_tol), u(config.max_iters),
                   format_number(metrics.relative_error),
                   format_number(static_cast<double>(nnz) / static_cast<double>(m_e.size())),
                   format_number(l1), format_number(res.primal_residual),
                   u(res.revealed_rank), u(res.iterations), res.converged ? "1" : "0"});

    manifest.config = config;
    manifest.seeds = {config.seed};
    manifest.dataset_fingerprint = fingerprint(m_e);
    manifest.details = {{"kind", "synthetic"}, {"m", shape.m},           {"n", shape.n},
                        {"r", shape.r},        {"density", args.density}, {"snr_c", args.snrc},
                        {"epsilon", inst.epsilon}};
    manifest.finished_at = iso8601_now();
    manifest.wall_time = seconds_since(t0);
    const fs::path path = output_path(args.out, "rpca_" + args.method);
    write_results(table, manifest, path);
    print_report(table, path);
    return 0;
}

// --- sweep ---------------------------------------------------------------------

struct SweepArgs {
    std::string problem = "completion";
    std::string synthetic = "200x200:r20";
    std::string axis = "missing_rate";
    std::string values;
    std::string methods;
    double missing = 0.5;
    std::string snr = "inf";
    double density = 0.2;
    double snrc = 1.0;
    std::size_t seeds = 10;
    std::string out;
    SolverFlags flags;
};

int run_sweep_cmd(const SweepArgs& args, const std::string& command) {
    const auto t0 = Clock::now();
    RunManifest manifest;
    manifest.command = command;
    manifest.started_at = iso8601_now();

    SweepSpec spec;
    if (args.problem == "completion") spec.problem = ProblemKind::Completion;
    else if (args.problem == "rpca") spec.problem = ProblemKind::Rpca;
    else throw InputError("--problem must be completion or rpca");
    const SyntheticShape shape = parse_synthetic(args.synthetic);
    spec.m = shape.m;
    spec.n = shape.n;
    spec.r = shape.r;
    spec.missing_rate = args.missing;
    spec.snr = parse_number(args.snr);
    spec.density = args.density;
    spec.snr_c = args.snrc;
    spec.axis = parse_sweep_axis(args.axis);
    spec.axis_values = parse_list(args.values);
    spec.methods = split_names(args.methods);
    spec.seeds = args.seeds;
    spec.config = args.flags.resolve();
    spec.base_seed = spec.config.seed;
    if (spec.problem == ProblemKind::Rpca && spec.config.d == 0)
        spec.config.d = std::max<std::size_t>(1, std::min(spec.m, spec.n) / 2);

    const SweepResult result = run_sweep(spec);
    const ResultTable rows = sweep_table(spec, result);
    const ResultTable summary = sweep_summary_table(result);

    manifest.config = spec.config;
    for (std::size_t s = 0; s < spec.seeds; ++s) manifest.seeds.push_back(spec.base_seed + s);
    manifest.dataset_fingerprint = sha256_hex(args.problem + " " + args.synthetic);
    nlohmann::json times = nlohmann::json::array();
    for (const auto& row : result.rows) times.push_back(row.metrics.wall_time);
    manifest.details = {{"problem", args.problem}, {"axis", to_string(spec.axis)},
                        {"axis_values", spec.axis_values}, {"methods", spec.methods},
                        {"missing_rate", spec.missing_rate}, {"snr", format_number(spec.snr)},
                        {"density", spec.density}, {"snr_c", spec.snr_c},
                        {"row_wall_times", times}};
    manifest.finished_at = iso8601_now();
    manifest.wall_time = seconds_since(t0);

    const fs::path path = output_path(args.out, "sweep_" + to_string(spec.axis));
    write_results(rows, manifest, path);
    const fs::path summary_path = fs::path(path.string() + ".summary" + path.extension().string());
    write_table(summary, summary_path);

    for (const auto& p : result.summary) {
        std::cout << p.method << ' ' << to_string(spec.axis) << '=' << format_number(p.axis_value)
                  << " mean_relative_error=" << format_number(p.mean_error)
                  << " std=" << format_number(p.std_error) << " seeds=" << p.count << '\n';
    }
    std::cout << "results: " << path.string() << '\n';
    std::cout << "summary: " << summary_path.string() << '\n';
    std::cout << "manifest: " << manifest_path(path).string() << '\n';
    return 0;
}

// --- verify --------------------------------------------------------------------

struct VerifyArgs {
    std::uint64_t seed = 0;
    std::size_t cases = 50;
    std::string q;
    bool perturb = false;
};

int run_verify_cmd(const VerifyArgs& args) {
    VerifyOptions opt;
    opt.seed = args.seed;
    opt.cases = args.cases;
    if (!args.q.empty()) opt.q = GroupExponent::parse(args.q);
    opt.perturb = args.perturb;
    bool all = true;
    for (const auto& o : run_verification(opt)) {
        std::cout << (o.passed ? "PASS " : "FAIL ") << o.name << " (" << o.checks
                  << " checks): " << o.detail << '\n';
        all = all && o.passed;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank matrix completion and robust PCA with factor group-sparse regularizers"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    const std::string command = command_line(argc, argv);

    CompleteArgs complete;
    auto* c = app.add_subcommand("complete", "recover a matrix from a subset of its entries");
    auto* c_syn = c->add_option("--synthetic", complete.synthetic, "synthetic instance MxN:rR");
    auto* c_rat = c->add_option("--ratings", complete.ratings, "ratings file: user item rating [timestamp]")
                      ->check(CLI::ExistingFile);
    c_syn->excludes(c_rat);
    c->add_option("--missing", complete.missing, "missing rate of the synthetic instance")
        ->check(CLI::Range(0.0, 1.0));
    c->add_option("--snr", complete.snr, "||M||_F/||E||_F of the synthetic noise, or inf");
    c->add_option("--method", complete.method, "fgsr23, fgsr12, fgsr_q, f_nuclear or svt")->required();
    c->add_option("--sample", complete.sample, "fraction of each user's ratings used for training");
    c->add_option("--min-item-ratings", complete.min_item_ratings, "drop items with fewer ratings");
    c->add_option("--out", complete.out, "results file (.tsv or .csv)");
    complete.flags.attach(c, false);

    RpcaArgs rpca;
    auto* r = app.add_subcommand("rpca", "split a matrix into low-rank and sparse parts");
    r->add_option("--synthetic", rpca.synthetic, "synthetic instance MxN:rR")->required();
    r->add_option("--density", rpca.density, "fraction of corrupted entries")->check(CLI::Range(0.0, 1.0));
    r->add_option("--snrc", rpca.snrc, "sigma(M)/epsilon of the corruption");
    r->add_option("--method", rpca.method, "fgsr23, fgsr12, fgsr_q or f_nuclear")->required();
    r->add_option("--out", rpca.out, "results file (.tsv or .csv)");
    rpca.flags.attach(r, true);

    SweepArgs sweep;
    auto* s = app.add_subcommand("sweep", "error curves over one parameter axis");
    s->add_option("--problem", sweep.problem, "completion or rpca");
    s->add_option("--synthetic", sweep.synthetic, "instance shape MxN:rR");
    s->add_option("--axis", sweep.axis, "missing_rate, d, snr, q or density");
    s->add_option("--values", sweep.values, "comma-separated axis values")->required();
    s->add_option("--methods,--method", sweep.methods, "comma-separated method names")->required();
    s->add_option("--missing", sweep.missing, "missing rate when it is not the axis");
    s->add_option("--snr", sweep.snr, "noise level when it is not the axis, or inf");
    s->add_option("--density", sweep.density, "corruption density when it is not the axis");
    s->add_option("--snrc", sweep.snrc, "corruption level");
    s->add_option("--seeds", sweep.seeds, "trials per point")->check(CLI::PositiveNumber);
    s->add_option("--out", sweep.out, "results file (.tsv or .csv)");
    sweep.flags.attach(s, true);

    VerifyArgs verify;
    auto* v = app.add_subcommand("verify", "check the regularizer identities and prox operators");
    v->add_option("--seed", verify.seed, "random seed");
    v->add_option("--cases", verify.cases, "random matrices per identity")->check(CLI::PositiveNumber);
    v->add_option("--q", verify.q, "restrict the general-q identity to one exponent");
    v->add_flag("--perturb", verify.perturb, "negative control: perturb the closed forms");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*c) {
            if (complete.synthetic.empty() && complete.ratings.empty()) {
                std::cerr << "error: complete needs --synthetic or --ratings\n" << c->help();
                return 2;
            }
            return run_complete(complete, command);
        }
        if (*r) return run_rpca_cmd(rpca, command);
        if (*s) return run_sweep_cmd(sweep, command);
        if (*v) return run_verify_cmd(verify);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
