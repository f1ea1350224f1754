#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fgsr/lrmc.hpp"
#include "fgsr/matrix.hpp"
#include "fgsr/observations.hpp"
#include "fgsr/rpca.hpp"

namespace fgsr {

inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

struct LrmcInstance {
    DenseMatrix m_true;
    ObservationSet omega;  ///< sampled entries of m_true + noise
    DenseMatrix noise;
    double missing_rate = 0.0;
    double snr = kInfiniteSnr;
    std::uint64_t seed = 0;
};

/// Rank-r M, Gaussian E scaled so ‖M‖_F/‖E‖_F = snr (E = 0 for infinite snr),
/// each entry observed independently with probability 1 − missing_rate.
LrmcInstance gen_lrmc_instance(std::size_t m, std::size_t n, std::size_t r, double missing_rate,
                               double snr, std::uint64_t seed);

struct RpcaInstance {
    DenseMatrix m_true;
    DenseMatrix corruption;
    double density = 0.0;
    double snr_c = 1.0;
    double epsilon = 0.0;  ///< entry deviation of the corruption, σ(M)/snr_c
    std::uint64_t seed = 0;

    DenseMatrix observed() const { return m_true + corruption; }
};

/// Rank-r M plus corruption supported on an i.i.d. Bernoulli(density) set with N(0, ε²) values.
RpcaInstance gen_rpca_instance(std::size_t m, std::size_t n, std::size_t r, double density,
                               double snr_c, std::uint64_t seed);

/// ‖M − M̂‖_F / ‖M‖_F.
double relative_error(const DenseMatrix& m_true, const DenseMatrix& m_hat);
/// Mean |prediction − truth| over matching index sets, divided by the rating range.
double nmae(const ObservationSet& predictions, const ObservationSet& truth, double rating_min,
            double rating_max);
/// Root mean squared error over matching index sets, divided by the rating range.
double rmse(const ObservationSet& predictions, const ObservationSet& truth, double rating_min,
            double rating_max);

struct MetricsReport {
    double relative_error = 0.0;
    double nmae = 0.0;
    double rmse = 0.0;
    double wall_time = 0.0;  ///< seconds
    std::size_t revealed_rank = 0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Metrics for a completion run on a synthetic instance. NMAE and RMSE are taken
/// over the unobserved entries with the range of m_true as normalizer.
MetricsReport lrmc_metrics(const LrmcInstance& instance, const RecoveryResult& result,
                           double wall_time);
MetricsReport rpca_metrics(const RpcaInstance& instance, const RpcaResult& result,
                           double wall_time);

enum class ProblemKind { Completion, Rpca };

/// Registered method names for a problem kind, in display order.
const std::vector<std::string>& registered_methods(ProblemKind kind);
/// Throws InputError listing the registered names if name is unknown.
void require_method(ProblemKind kind, const std::string& name);

/// Runs a registered completion method. With noiseless set, fgsr23 and fgsr12 use the
/// equality-constrained ADMM; otherwise the penalized PALM models.
RecoveryResult run_completion_method(const std::string& name, const ObservationSet& omega,
                                     const SolverConfig& config, bool noiseless);
RpcaResult run_rpca_method(const std::string& name, const DenseMatrix& m_e,
                           const SolverConfig& config);

enum class SweepAxis { MissingRate, InitialRank, Snr, Q, NoiseDensity };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& text);

struct SweepSpec {
    ProblemKind problem = ProblemKind::Completion;
    std::size_t m = 200;
    std::size_t n = 200;
    std::size_t r = 20;
    double missing_rate = 0.5;
    double snr = kInfiniteSnr;
    double density = 0.2;
    double snr_c = 1.0;
    SweepAxis axis = SweepAxis::MissingRate;
    std::vector<double> axis_values;
    std::vector<std::string> methods;
    std::size_t seeds = 10;
    std::uint64_t base_seed = 0;
    SolverConfig config;
};

struct SweepRow {
    std::string method;
    SweepAxis axis = SweepAxis::MissingRate;
    double axis_value = 0.0;
    std::uint64_t seed = 0;
    double missing_rate = 0.0;
    double snr = kInfiniteSnr;
    double density = 0.0;
    double snr_c = 0.0;
    SolverConfig config;  ///< exact configuration the solver ran with
    MetricsReport metrics;
};

struct SweepPoint {
    std::string method;
    double axis_value = 0.0;
    std::size_t count = 0;
    double mean_error = 0.0;
    double std_error = 0.0;  ///< population standard deviation over seeds
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepPoint> summary;
};

/// One row per (method, axis value, seed). Jobs run concurrently when OpenMP has
/// more than one thread; the row order does not depend on scheduling.
SweepResult run_sweep(const SweepSpec& spec);

/// Mean and population standard deviation of the rows' relative errors per
/// (method, axis value), in first-appearance order.
std::vector<SweepPoint> summarize(const std::vector<SweepRow>& rows);

}  // namespace fgsr
