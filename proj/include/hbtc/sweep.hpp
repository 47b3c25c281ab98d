#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hbtc/admm.hpp"
#include "hbtc/config.hpp"
#include "hbtc/synth.hpp"

namespace hbtc {

enum class SweptVariable { SnrDb, SampleRatio, Lambda };
enum class Method { BtdAls, BtdNls, CpdAls, CpdNls };
/// How one result is picked when several lambda values are tried per trial.
enum class LambdaSelect {
    BestRlne,    ///< smallest error against the clean tensor (needs ground truth)
    Harmonicity, ///< most harmonic estimated B and C columns
};

std::string_view to_string(SweptVariable v);
std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct SweepSpec {
    SweptVariable swept = SweptVariable::SnrDb;
    std::vector<double> values;
    std::size_t trials = 50;
    GenConfig gen;
    SolverConfig solver;
    std::vector<Method> methods{Method::BtdAls};
    /// Empty: solve once with solver.lambda (or the swept lambda).
    std::vector<double> lambda_grid;
    LambdaSelect lambda_select = LambdaSelect::BestRlne;

    void validate() const;
};

struct SweepRow {
    Method method = Method::BtdAls;
    double swept_value = 0.0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double rlne = 1.0;
    double harmonicity = 0.0;
    std::size_t iterations = 0;
    double wall_time = 0.0; ///< seconds, summed over the lambda grid
    std::string error;      ///< empty unless the solve aborted (then rlne = 1)
};

struct SweepAggregate {
    Method method = Method::BtdAls;
    double swept_value = 0.0;
    double mean_rlne = 0.0;
    double std_rlne = 0.0; ///< sample standard deviation, 0 for a single trial
    std::size_t trials = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepAggregate> aggregates;
};

/// Solver backend and block structure used by `method` for ground truth with structure `truth`.
BlockStructure method_structure(Method method, const BlockStructure& truth);
Backend method_backend(Method method);

/**
 * Monte-Carlo sweep. Trial t draws ground truth with seed gen.seed + t and
 * initializes the solver with the same seed; every method sees the same draw.
 * Runs (value, trial) jobs on `threads` workers (0: HBTC_THREADS or the core
 * count); rows come back sorted by (method, value, trial) regardless.
 */
SweepResult run_sweep(const SweepSpec& spec, std::size_t threads = 0);

std::vector<SweepAggregate> aggregate(const std::vector<SweepRow>& rows, const std::vector<Method>& method_order);

/// Worker count from HBTC_THREADS, else hardware concurrency (at least 1).
std::size_t default_thread_count();

SweepSpec sweep_spec_from(const KeyValueConfig& kv);

// rows:       method,swept_value,trial,seed,lambda,rlne,harmonicity,iterations,wall_time,error
// aggregates: method,swept_value,mean_rlne,std_rlne,trials
void write_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_aggregates_csv(std::ostream& out, const std::vector<SweepAggregate>& aggs);
std::vector<SweepRow> read_rows_csv(std::istream& in);

} // namespace hbtc
