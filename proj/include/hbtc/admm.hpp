#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hbtc/btd.hpp"
#include "hbtc/factor_update.hpp"

namespace hbtc {

/// Which SVT threshold the auxiliary update uses.
enum class SvtThreshold {
    HalfInverseBeta, ///< 1/(2 beta): exact prox for the beta ||.||^2 penalty
    InverseBeta,     ///< 1/beta: the convention of a beta/2 penalty
};

enum class InitMode { Random, Provided, Spectral };

struct SolverConfig {
    double lambda = 1.0;
    double beta0 = 1e-3;
    double rho_penalty = 1.05;
    std::size_t max_iterations = 500;
    double tol_rel_change = 1e-8;
    Backend backend = Backend::ALS;
    std::uint64_t seed = 1;
    InitMode init = InitMode::Random;
    SvtThreshold svt_threshold = SvtThreshold::HalfInverseBeta;
    /// Replace observed entries of the completed tensor with the data.
    bool data_consistency = false;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

struct TraceRow {
    std::size_t iter = 0;
    double f1 = 0.0;
    double f2 = 0.0;
    double f_lag = 0.0;
    double beta = 0.0;
    double rel_change = 0.0;
};

struct SolveReport {
    ComplexTensor3 completed;
    BtdFactors factors;
    std::size_t iterations_run = 0;
    std::vector<TraceRow> trace;
    bool converged = false;
    double initial_f1 = 0.0;
    double final_constraint_residual = 0.0;
};

/**
 * Initial state from the data: A ~ CN(0,1) scaled by ||W*Y||_F / sqrt(#observed), columns of B and C
 * unit-modulus harmonics, E = H(b), F = H(c), zero multipliers. Deterministic in config.seed.
 *
 * InitMode::Random draws the generators uniformly on the unit circle. InitMode::Spectral takes the
 * strongest peaks of the zero-filled mode-3 periodogram as the C generators, then for each block
 * demodulates the observations by c_r and takes the L_r strongest mode-2 peaks as the B generators.
 */
AdmmState init_state(const Observations& obs, const BlockStructure& structure, const SolverConfig& config);

/// State built around caller-supplied factors (InitMode::Provided).
AdmmState init_state(const BtdFactors& factors, const SolverConfig& config);

/// One ADMM iteration: factor update, SVT on the auxiliaries, multiplier ascent, penalty growth.
void admm_iterate(const Observations& obs, AdmmState& state, const SolverConfig& config);

/// Threshold used in the auxiliary update for the current penalty.
double svt_tau(double beta, SvtThreshold mode);

/**
 * Full solve. Stops after max_iterations or when the relative change of the
 * reconstruction drops below tol_rel_change. Throws ConfigError on an empty
 * mask and NumericalError (naming the failing step) on numerical breakdown.
 */
SolveReport solve(const ComplexTensor3& y, const ObservationMask& w, const BlockStructure& structure,
                  const SolverConfig& config, const std::optional<BtdFactors>& initial = std::nullopt);

/// Mean over columns of B and C of sigma_1 / ||H(x)||_F; 1 for exact harmonics.
double harmonicity(const BtdFactors& factors);

/// CSV with header iter,f1,f2,f_lag,beta,rel_change.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

} // namespace hbtc
