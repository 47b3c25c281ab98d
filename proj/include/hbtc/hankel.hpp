#pragma once

#include <cstddef>
#include <vector>

#include "hbtc/tensor.hpp"

namespace hbtc {

/// Shape of the n1 x n2 Hankel matrix built from a length-n vector (n1 + n2 = n + 1).
struct HankelShape {
    std::size_t n = 0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    friend bool operator==(const HankelShape&, const HankelShape&) = default;
};

/// Near-square split: n1 = ceil((n+1)/2), n2 = n + 1 - n1. Requires n >= 2.
HankelShape hankel_shape(std::size_t n);

/// H(v): result(p, q) = v(p + q) (0-based), shape from hankel_shape(v.size()).
CMatrix hankelize(const CVector& v);

/// Adjoint of hankelize: anti-diagonal sums of x.
CVector hankel_adjoint(const CMatrix& x);

/// Anti-diagonal multiplicities, count(t) = min(t, n1, n2, n+1-t) in 1-based t.
std::vector<double> hankel_counts(std::size_t n);

/**
 * Singular value thresholding, the proximal operator of tau*||.||_*:
 *   svt(X, tau) = argmin_E  tau ||E||_* + 1/2 ||X - E||_F^2
 *              = U max(S - tau, 0) V^H.
 * Throws DomainError for tau <= 0 and NumericalError for non-finite input.
 */
CMatrix svt(const CMatrix& x, double tau);

/// Singular values in decreasing order.
Eigen::VectorXd singular_values(const CMatrix& x);

double nuclear_norm(const CMatrix& x);

/// Real part of the Frobenius inner product, Re tr(X^H Y).
double inner_re(const CMatrix& x, const CMatrix& y);

} // namespace hbtc
