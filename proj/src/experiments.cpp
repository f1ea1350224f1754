#include "fgsr/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <string>
#include <utility>

#include "fgsr/errors.hpp"
#include "fgsr/random.hpp"

namespace fgsr {

LrmcInstance gen_lrmc_instance(std::size_t m, std::size_t n, std::size_t r, double missing_rate,
                               double snr, std::uint64_t seed) {
    if (!(missing_rate >= 0.0 && missing_rate < 1.0))
        throw InputError("gen_lrmc_instance: missing_rate must lie in [0, 1)");
    if (!(snr > 0.0)) throw InputError("gen_lrmc_instance: snr must be positive");

    LrmcInstance inst;
    inst.m_true = random_low_rank(m, n, r, seed);
    inst.noise = DenseMatrix(m, n);
    inst.missing_rate = missing_rate;
    inst.snr = snr;
    inst.seed = seed;
    if (std::isfinite(snr)) {
        Rng rng = make_rng(seed, Stream::Noise);
        fill_standard_normal(rng, inst.noise.values());
        const double e_norm = frobenius_norm(inst.noise);
        if (e_norm > 0.0) inst.noise *= frobenius_norm(inst.m_true) / (snr * e_norm);
    }

    Rng rng = make_rng(seed, Stream::Sampling);
    std::vector<Observation> entries;
    entries.reserve(static_cast<std::size_t>((1.0 - missing_rate) * double(m * n)) + 16);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (uniform01(rng) >= missing_rate) {
                entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                   inst.m_true(i, j) + inst.noise(i, j)});
            }
        }
    }
    inst.omega = ObservationSet(m, n, std::move(entries));
    return inst;
}

RpcaInstance gen_rpca_instance(std::size_t m, std::size_t n, std::size_t r, double density,
                               double snr_c, std::uint64_t seed) {
    if (!(density >= 0.0 && density <= 1.0))
        throw InputError("gen_rpca_instance: density must lie in [0, 1]");
    if (!(snr_c > 0.0) || !std::isfinite(snr_c))
        throw InputError("gen_rpca_instance: snr_c must be positive and finite");

    RpcaInstance inst;
    inst.m_true = random_low_rank(m, n, r, seed);
    inst.corruption = DenseMatrix(m, n);
    inst.density = density;
    inst.snr_c = snr_c;
    inst.seed = seed;

    const auto vals = inst.m_true.values();
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size());
    inst.epsilon = std::sqrt(var) / snr_c;

    Rng rng = make_rng(seed, Stream::Corruption);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& e : inst.corruption.values()) {
        if (uniform01(rng) < density) e = inst.epsilon * normal(rng);
    }
    return inst;
}

double relative_error(const DenseMatrix& m_true, const DenseMatrix& m_hat) {
    if (m_true.rows() != m_hat.rows() || m_true.cols() != m_hat.cols())
        throw DimensionError("relative_error: shape mismatch");
    const double denom = frobenius_norm(m_true);
    if (denom == 0.0) throw InputError("relative_error: reference matrix is zero");
    double acc = 0.0;
    for (std::size_t e = 0; e < m_true.size(); ++e) {
        const double d = m_true.values()[e] - m_hat.values()[e];
        acc += d * d;
    }
    return std::sqrt(acc) / denom;
}

namespace {

void check_rating_args(const ObservationSet& predictions, const ObservationSet& truth,
                       double rating_min, double rating_max, const char* op) {
    if (!predictions.same_indices(truth))
        throw DimensionError(std::string(op) + ": prediction and truth index sets differ");
    if (!(rating_max > rating_min))
        throw InputError(std::string(op) + ": rating_max must exceed rating_min");
    if (truth.empty()) throw InputError(std::string(op) + ": empty evaluation set");
}

}  // namespace

double nmae(const ObservationSet& predictions, const ObservationSet& truth, double rating_min,
            double rating_max) {
    check_rating_args(predictions, truth, rating_min, rating_max, "nmae");
    double acc = 0.0;
    for (std::size_t e = 0; e < truth.size(); ++e)
        acc += std::abs(predictions.entries()[e].value - truth.entries()[e].value);
    return acc / static_cast<double>(truth.size()) / (rating_max - rating_min);
}

double rmse(const ObservationSet& predictions, const ObservationSet& truth, double rating_min,
            double rating_max) {
    check_rating_args(predictions, truth, rating_min, rating_max, "rmse");
    double acc = 0.0;
    for (std::size_t e = 0; e < truth.size(); ++e) {
        const double d = predictions.entries()[e].value - truth.entries()[e].value;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(truth.size())) / (rating_max - rating_min);
}

namespace {

std::pair<double, double> unobserved_errors(const DenseMatrix& truth, const DenseMatrix& estimate,
                                            const std::vector<std::uint8_t>& observed) {
    const auto [lo, hi] = std::minmax_element(truth.values().begin(), truth.values().end());
    const double range = *hi - *lo;
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t e = 0; e < truth.size(); ++e) {
        if (!observed.empty() && observed[e]) continue;
        const double d = estimate.values()[e] - truth.values()[e];
        abs_sum += std::abs(d);
        sq_sum += d * d;
        ++count;
    }
    if (count == 0 || range <= 0.0) return {0.0, 0.0};
    const double c = static_cast<double>(count);
    return {abs_sum / c / range, std::sqrt(sq_sum / c) / range};
}

}  // namespace

MetricsReport lrmc_metrics(const LrmcInstance& instance, const RecoveryResult& result,
                           double wall_time) {
    MetricsReport report;
    report.relative_error = relative_error(instance.m_true, result.x_hat);
    std::tie(report.nmae, report.rmse) =
        unobserved_errors(instance.m_true, result.x_hat, instance.omega.mask());
    report.wall_time = wall_time;
    report.revealed_rank = result.revealed_rank;
    report.iterations = result.iterations;
    report.converged = result.converged;
    return report;
}

MetricsReport rpca_metrics(const RpcaInstance& instance, const RpcaResult& result,
                           double wall_time) {
    MetricsReport report;
    report.relative_error = relative_error(instance.m_true, result.low_rank);
    std::tie(report.nmae, report.rmse) = unobserved_errors(instance.m_true, result.low_rank, {});
    report.wall_time = wall_time;
    report.revealed_rank = result.revealed_rank;
    report.iterations = result.iterations;
    report.converged = result.converged;
    return report;
}

const std::vector<std::string>& registered_methods(ProblemKind kind) {
    static const std::vector<std::string> completion{"fgsr23", "fgsr12", "fgsr_q", "f_nuclear",
                                                     "svt"};
    static const std::vector<std::string> rpca{"fgsr23", "fgsr12", "fgsr_q", "f_nuclear"};
    return kind == ProblemKind::Completion ? completion : rpca;
}

void require_method(ProblemKind kind, const std::string& name) {
    const auto& names = registered_methods(kind);
    if (std::find(names.begin(), names.end(), name) != names.end()) return;
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw InputError("unknown method '" + name + "'; registered methods: " + list);
}

namespace {

SolverConfig method_config(const std::string& name, SolverConfig config) {
    if (name == "fgsr23") {
        config.q = GroupExponent{};
        config.b_penalty = BPenalty::HalfFrobeniusSq;
    } else if (name == "fgsr12") {
        config.q = GroupExponent{};
        config.b_penalty = BPenalty::GroupL2;
    } else if (name == "fgsr_q") {
        config.b_penalty = BPenalty::HalfFrobeniusSq;
    }
    return config;
}

}  // namespace

RecoveryResult run_completion_method(const std::string& name, const ObservationSet& omega,
                                     const SolverConfig& config, bool noiseless) {
    require_method(ProblemKind::Completion, name);
    const SolverConfig c = method_config(name, config);
    if (name == "f_nuclear") return solve_f_nuclear(omega, c);
    if (name == "svt") return solve_svt_nuclear(omega, c);
    if (noiseless && name != "fgsr_q") return solve_noiseless_admm(omega, c);
    return solve_generalized(omega, c);
}

RpcaResult run_rpca_method(const std::string& name, const DenseMatrix& m_e,
                           const SolverConfig& config) {
    require_method(ProblemKind::Rpca, name);
    const SolverConfig c = method_config(name, config);
    if (name == "f_nuclear") return solve_rpca_f_nuclear(m_e, c);
    return solve_rpca(m_e, c);
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::MissingRate: return "missing_rate";
        case SweepAxis::InitialRank: return "d";
        case SweepAxis::Snr: return "snr";
        case SweepAxis::Q: return "q";
        case SweepAxis::NoiseDensity: return "density";
    }
    return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& text) {
    for (SweepAxis a : {SweepAxis::MissingRate, SweepAxis::InitialRank, SweepAxis::Snr,
                        SweepAxis::Q, SweepAxis::NoiseDensity}) {
        if (text == to_string(a)) return a;
    }
    if (text == "missing") return SweepAxis::MissingRate;
    throw InputError("unknown sweep axis '" + text +
                     "'; expected missing_rate, d, snr, q or density");
}

namespace {

struct Job {
    std::size_t method = 0;
    std::size_t point = 0;
    std::size_t seed_index = 0;
};

SweepRow run_job(const SweepSpec& spec, const Job& job) {
    SweepRow row;
    row.method = spec.methods[job.method];
    row.axis = spec.axis;
    row.axis_value = spec.axis_values[job.point];
    row.seed = spec.base_seed + job.seed_index;
    row.missing_rate = spec.missing_rate;
    row.snr = spec.snr;
    row.density = spec.density;
    row.snr_c = spec.snr_c;
    SolverConfig config = spec.config;
    config.seed = row.seed;
    switch (spec.axis) {
        case SweepAxis::MissingRate: row.missing_rate = row.axis_value; break;
        case SweepAxis::InitialRank:
            if (!(row.axis_value >= 1.0) || row.axis_value != std::floor(row.axis_value))
                throw InputError("run_sweep: d values must be positive integers");
            config.d = static_cast<std::size_t>(row.axis_value);
            break;
        case SweepAxis::Snr: row.snr = row.axis_value; break;
        case SweepAxis::Q: config.q = GroupExponent::from_value(row.axis_value); break;
        case SweepAxis::NoiseDensity: row.density = row.axis_value; break;
    }
    row.config = method_config(row.method, config);

    using Clock = std::chrono::steady_clock;
    if (spec.problem == ProblemKind::Completion) {
        const LrmcInstance inst =
            gen_lrmc_instance(spec.m, spec.n, spec.r, row.missing_rate, row.snr, row.seed);
        const auto t0 = Clock::now();
        const RecoveryResult res =
            run_completion_method(row.method, inst.omega, config, !std::isfinite(row.snr));
        const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
        row.metrics = lrmc_metrics(inst, res, dt);
    } else {
        const RpcaInstance inst =
            gen_rpca_instance(spec.m, spec.n, spec.r, row.density, spec.snr_c, row.seed);
        const auto t0 = Clock::now();
        const RpcaResult res = run_rpca_method(row.method, inst.observed(), config);
        const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
        row.metrics = rpca_metrics(inst, res, dt);
    }
    return row;
}

}  // namespace

std::vector<SweepPoint> summarize(const std::vector<SweepRow>& rows) {
    std::vector<SweepPoint> points;
    std::vector<std::vector<double>> errors;
    std::map<std::pair<std::string, double>, std::size_t> index;
    for (const auto& row : rows) {
        const auto key = std::make_pair(row.method, row.axis_value);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, points.size()).first;
            points.push_back({row.method, row.axis_value, 0, 0.0, 0.0});
            errors.emplace_back();
        }
        errors[it->second].push_back(row.metrics.relative_error);
    }
    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto& e = errors[p];
        double mean = 0.0;
        for (double v : e) mean += v;
        mean /= static_cast<double>(e.size());
        double var = 0.0;
        for (double v : e) var += (v - mean) * (v - mean);
        var /= static_cast<double>(e.size());
        points[p].count = e.size();
        points[p].mean_error = mean;
        points[p].std_error = std::sqrt(var);
    }
    return points;
}

SweepResult run_sweep(const SweepSpec& spec) {
    const ProblemKind kind = spec.problem;
    if (spec.methods.empty()) throw InputError("run_sweep: no methods given");
    for (const auto& m : spec.methods) require_method(kind, m);
    if (spec.axis_values.empty()) throw InputError("run_sweep: no axis values given");
    if (spec.seeds == 0) throw InputError("run_sweep: seeds must be at least 1");
    if (kind == ProblemKind::Rpca && spec.axis != SweepAxis::NoiseDensity &&
        spec.axis != SweepAxis::InitialRank && spec.axis != SweepAxis::Q)
        throw InputError("run_sweep: RPCA sweeps support the d, q and density axes");
    if (kind == ProblemKind::Completion && spec.axis == SweepAxis::NoiseDensity)
        throw InputError("run_sweep: completion sweeps do not have a density axis");

    std::vector<Job> jobs;
    for (std::size_t m = 0; m < spec.methods.size(); ++m)
        for (std::size_t p = 0; p < spec.axis_values.size(); ++p)
            for (std::size_t s = 0; s < spec.seeds; ++s) jobs.push_back({m, p, s});

    std::vector<SweepRow> rows(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    const long long count = static_cast<long long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long long k = 0; k < count; ++k) {
        try {
            rows[static_cast<std::size_t>(k)] = run_job(spec, jobs[static_cast<std::size_t>(k)]);
        } catch (...) {
            failures[static_cast<std::size_t>(k)] = std::current_exception();
        }
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    SweepResult result;
    result.summary = summarize(rows);
    result.rows = std::move(rows);
    return result;
}

}  // namespace fgsr
