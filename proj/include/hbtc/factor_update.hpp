#pragma once

#include <cstddef>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hbtc/btd.hpp"

namespace hbtc {

enum class Backend { ALS, GN };

std::string_view to_string(Backend b);
Backend parse_backend(std::string_view s);

// Exact block minimizers of g with the other two factors held fixed. Each
// decomposes into independent Hermitian positive-definite row systems solved
// by Cholesky; rows may be processed in any order.
void als_update_A(const Observations& obs, AdmmState& state);
void als_update_B(const Observations& obs, AdmmState& state);
void als_update_C(const Observations& obs, AdmmState& state);

/**
 * Real stacking of the factor entries.
 *
 * Complex entry e maps to z(2e) = Re, z(2e+1) = Im, with entries ordered
 * vec(A), vec(B), vec(C) (column-major).
 */
Eigen::VectorXd pack(const BtdFactors& factors);
BtdFactors unpack(const Eigen::VectorXd& z, const Dims& dims, const BlockStructure& structure);

/// Residual model - y at observed entries, stacked as (Re, Im) pairs.
Eigen::VectorXd residual(const Observations& obs, const BtdFactors& factors);

/// Sparse Jacobian of residual() with respect to pack(); 2(2F+R) nonzeros per observed entry.
Eigen::SparseMatrix<double> jacobian(const Observations& obs, const BtdFactors& factors);

/// Gradient and (diagonal) Hessian of h, the part of g other than lambda*f1, in packed coordinates.
struct QuadraticTerm {
    Eigen::VectorXd gradient;
    Eigen::VectorXd hessian_diag;
};
QuadraticTerm penalty_quadratic(const AdmmState& state);

struct GnWorkspace {
    Eigen::VectorXd z;
    Eigen::VectorXd r;
    Eigen::SparseMatrix<double> J;
    Eigen::VectorXd step;
    double trust_radius = 1.0;

    // Outcome of the last step.
    bool accepted = false;
    double ratio = 0.0;
    double predicted_decrease = 0.0;
    double actual_decrease = 0.0;
};

struct TrustRegionParams {
    double accept = 0.1;
    double expand_above = 0.75;
    double expand_factor = 2.0;
    double shrink_below = 0.25;
    double shrink_factor = 0.25;
    /// Packed unknown counts up to this use a dense Cholesky for the Newton point.
    std::size_t dense_solve_limit = 2048;
    /// Beyond the dense limit: sparse LDLT while I*J*K is at most this, capped CG above.
    std::size_t direct_solve_limit = 64 * 64 * 64;
    int cg_max_iterations = 50;
};

/**
 * Dogleg minimization of the local model
 *   m(p) = lambda ||r + J p||^2 + h(z + p),  ||p|| <= Delta,
 * followed by the usual ratio test. Factors change only on acceptance.
 * Uses and updates ws.trust_radius.
 */
void gn_step(const Observations& obs, AdmmState& state, GnWorkspace& ws, const TrustRegionParams& params = {});

/// One ALS sweep (A, B, C) or one dogleg step. The GN radius lives in state.trust_radius.
void update_factors(const Observations& obs, AdmmState& state, Backend backend);

} // namespace hbtc
