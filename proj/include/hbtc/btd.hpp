#pragma once

#include <cstddef>
#include <vector>

#include "hbtc/hankel.hpp"
#include "hbtc/tensor.hpp"

namespace hbtc {

/**
 * Block sizes L_1..L_R of a multilinear rank-(L_r, L_r, 1) decomposition.
 *
 * Columns of A and B are laid out block-major: column col(r, l) = l + sum_{s<r} L_s
 * (0-based r and l).
 */
class BlockStructure {
public:
    BlockStructure() = default;
    explicit BlockStructure(std::vector<std::size_t> sizes);

    /// R blocks of size 1 (the CPD special case).
    static BlockStructure rank_one(std::size_t count);

    [[nodiscard]] std::size_t blocks() const noexcept { return sizes_.size(); }
    [[nodiscard]] std::size_t columns() const noexcept { return owner_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
    [[nodiscard]] std::size_t size(std::size_t r) const { return sizes_[r]; }
    [[nodiscard]] std::size_t col(std::size_t r, std::size_t l) const { return first_[r] + l; }
    [[nodiscard]] std::size_t first(std::size_t r) const { return first_[r]; }
    /// Block index r owning column f.
    [[nodiscard]] std::size_t block_of(std::size_t f) const { return owner_[f]; }

    friend bool operator==(const BlockStructure& a, const BlockStructure& b) { return a.sizes_ == b.sizes_; }

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> first_;
    std::vector<std::size_t> owner_;
};

/// Factor matrices A (I x F), B (J x F), C (K x R).
struct BtdFactors {
    CMatrix A;
    CMatrix B;
    CMatrix C;
    BlockStructure structure;

    [[nodiscard]] Dims dims() const noexcept {
        return {static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(B.rows()),
                static_cast<std::size_t>(C.rows())};
    }
    /// Throws ShapeError unless column counts agree with the structure.
    void validate() const;
    [[nodiscard]] bool all_finite() const { return A.allFinite() && B.allFinite() && C.allFinite(); }
    /// Model value at one (0-based) entry.
    [[nodiscard]] cplx entry(std::size_t i, std::size_t j, std::size_t k) const;
};

/// Observed entries of Y, indexed by each mode for row-wise solves.
class Observations {
public:
    struct Entry {
        std::size_t i, j, k;
        cplx value;
    };

    Observations(const ComplexTensor3& y, const ObservationMask& w);

    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t count() const noexcept { return entries_.size(); }
    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
    /// Indices into entries() with the given first/second/third index.
    [[nodiscard]] const std::vector<std::size_t>& by_i(std::size_t i) const { return by_i_[i]; }
    [[nodiscard]] const std::vector<std::size_t>& by_j(std::size_t j) const { return by_j_[j]; }
    [[nodiscard]] const std::vector<std::size_t>& by_k(std::size_t k) const { return by_k_[k]; }
    /// Frobenius norm of the observed part of Y.
    [[nodiscard]] double norm() const noexcept { return norm_; }

private:
    Dims dims_;
    std::vector<Entry> entries_;
    std::vector<std::vector<std::size_t>> by_i_, by_j_, by_k_;
    double norm_ = 0.0;
};

/// Factors plus ADMM auxiliaries E_{r,l} ~ H(b_{r,l}), F_r ~ H(c_r), multipliers and penalty.
struct AdmmState {
    BtdFactors factors;
    std::vector<CMatrix> E;  ///< one per column of B
    std::vector<CMatrix> Fa; ///< one per column of C
    std::vector<CMatrix> M;  ///< multipliers for E
    std::vector<CMatrix> N;  ///< multipliers for Fa
    double beta = 1e-3;
    double lambda = 1.0;
    std::size_t iteration = 0;
    /// Dogleg trust radius carried between Gauss-Newton steps.
    double trust_radius = 1.0;
    /// False when the last Gauss-Newton step was rejected by the ratio test.
    bool last_step_accepted = true;

    void validate() const;
};

/// T = sum_r (A_r B_r^T) o c_r.
ComplexTensor3 reconstruct(const BtdFactors& factors);

/// f1 = ||Y - W * T(factors)||_F^2 over observed entries.
double eval_f1(const ComplexTensor3& y, const ObservationMask& w, const BtdFactors& factors);
double eval_f1(const Observations& obs, const BtdFactors& factors);

/// f2 = sum ||H(b_{r,l})||_* + sum ||H(c_r)||_* + ||A||_F^2.
double eval_f2(const BtdFactors& factors);

/**
 * Augmented Lagrangian
 *   lambda f1 + ||A||^2 + sum <M, H(b) - E> + beta ||H(b) - E||^2
 *                       + sum <N, H(c) - F> + beta ||H(c) - F||^2,
 * with <X, Y> = Re tr(X^H Y).
 */
double eval_lagrangian(const ComplexTensor3& y, const ObservationMask& w, const AdmmState& state);
double eval_lagrangian(const Observations& obs, const AdmmState& state);

/**
 * Factor subproblem objective
 *   g = lambda f1 + ||A||^2 + beta sum ||H(b) - E + M/beta||^2 + beta sum ||H(c) - F + N/beta||^2.
 */
double eval_g(const Observations& obs, const AdmmState& state);
double eval_g(const Observations& obs, const AdmmState& state, const BtdFactors& factors);

/// max over columns of ||H(x) - E||_F / (1 + ||E||_F), over both B and C.
double constraint_residual(const AdmmState& state);

} // namespace hbtc
