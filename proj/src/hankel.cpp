#include "hbtc/hankel.hpp"

#include <algorithm>
#include <complex>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace hbtc {

namespace {

HankelShape shape_from_matrix(const CMatrix& x) {
    const auto n1 = static_cast<std::size_t>(x.rows());
    const auto n2 = static_cast<std::size_t>(x.cols());
    if (n1 == 0 || n2 == 0) throw ShapeError("hankel_adjoint: empty matrix");
    return {n1 + n2 - 1, n1, n2};
}

} // namespace

HankelShape hankel_shape(std::size_t n) {
    if (n < 2) throw DomainError("hankel_shape: vector length must be at least 2, got " + std::to_string(n));
    const std::size_t n1 = (n + 2) / 2;
    return {n, n1, n + 1 - n1};
}

CMatrix hankelize(const CVector& v) {
    const HankelShape s = hankel_shape(static_cast<std::size_t>(v.size()));
    CMatrix h(s.n1, s.n2);
    for (Eigen::Index q = 0; q < h.cols(); ++q) {
        for (Eigen::Index p = 0; p < h.rows(); ++p) h(p, q) = v(p + q);
    }
    return h;
}

CVector hankel_adjoint(const CMatrix& x) {
    const HankelShape s = shape_from_matrix(x);
    CVector out = CVector::Zero(static_cast<Eigen::Index>(s.n));
    for (Eigen::Index q = 0; q < x.cols(); ++q) {
        for (Eigen::Index p = 0; p < x.rows(); ++p) out(p + q) += x(p, q);
    }
    return out;
}

std::vector<double> hankel_counts(std::size_t n) {
    const HankelShape s = hankel_shape(n);
    std::vector<double> c(n);
    for (std::size_t t = 1; t <= n; ++t) {
        c[t - 1] = static_cast<double>(std::min({t, s.n1, s.n2, n + 1 - t}));
    }
    return c;
}

Eigen::VectorXd singular_values(const CMatrix& x) {
    if (x.size() == 0) return {};
    CMatrix work = x;
    Eigen::VectorXd s(std::min(x.rows(), x.cols()));
    const lapack_int m = static_cast<lapack_int>(x.rows());
    const lapack_int n = static_cast<lapack_int>(x.cols());
    const lapack_int info =
        LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, s.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw NumericalError("singular_values: zgesdd failed with info " + std::to_string(info));
    return s;
}

double nuclear_norm(const CMatrix& x) { return singular_values(x).sum(); }

double inner_re(const CMatrix& x, const CMatrix& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) throw ShapeError("inner_re: shape mismatch");
    double s = 0.0;
    for (Eigen::Index n = 0; n < x.size(); ++n) {
        const cplx a = x.data()[n];
        const cplx b = y.data()[n];
        s += a.real() * b.real() + a.imag() * b.imag();
    }
    return s;
}

CMatrix svt(const CMatrix& x, double tau) {
    if (!(tau > 0.0)) throw DomainError("svt: threshold must be positive");
    if (!x.allFinite()) throw NumericalError("svt: non-finite input matrix");
    const lapack_int m = static_cast<lapack_int>(x.rows());
    const lapack_int n = static_cast<lapack_int>(x.cols());
    const lapack_int k = std::min(m, n);
    CMatrix work = x;
    CMatrix u(m, k);
    CMatrix vt(k, n);
    Eigen::VectorXd s(k);
    const lapack_int info =
        LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, s.data(), u.data(), m, vt.data(), k);
    if (info != 0) throw NumericalError("svt: zgesdd failed with info " + std::to_string(info));
    s = (s.array() - tau).max(0.0).matrix();
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > 0.0) ++r;
    if (r == 0) return CMatrix::Zero(x.rows(), x.cols());
    return u.leftCols(r) * s.head(r).asDiagonal() * vt.topRows(r);
}

} // namespace hbtc
