#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "hbtc/factor_update.hpp"
#include "hbtc/hankel.hpp"
#include "test_util.hpp"

using namespace hbtc;
using namespace hbtc::testing;

namespace {

// Plain CPD ALS with Hankel-penalized B and C rows, written directly in terms of rank-one columns.
struct CpdReference {
    const Observations& obs;
    AdmmState& st;

    void update_A() {
        CMatrix& A = st.factors.A;
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            const auto& idx = obs.by_i(static_cast<std::size_t>(i));
            CMatrix D(static_cast<Eigen::Index>(idx.size()), A.cols());
            CVector y(D.rows());
            for (Eigen::Index e = 0; e < D.rows(); ++e) {
                const auto& en = obs.entries()[idx[static_cast<std::size_t>(e)]];
                for (Eigen::Index f = 0; f < A.cols(); ++f) {
                    D(e, f) = st.factors.B(static_cast<Eigen::Index>(en.j), f) * st.factors.C(static_cast<Eigen::Index>(en.k), f);
                }
                y(e) = en.value;
            }
            const CMatrix G = st.lambda * D.adjoint() * D + CMatrix::Identity(A.cols(), A.cols());
            A.row(i) = G.ldlt().solve(st.lambda * D.adjoint() * y).transpose();
        }
    }

    void update_mode(CMatrix& X, const CMatrix& P, const CMatrix& Q, bool second, const std::vector<CMatrix>& aux,
                     const std::vector<CMatrix>& mult) {
        const double beta = st.beta;
        const std::vector<double> counts = hankel_counts(static_cast<std::size_t>(X.rows()));
        std::vector<CVector> s;
        for (std::size_t f = 0; f < aux.size(); ++f) s.push_back(hankel_adjoint(aux[f] - mult[f] / beta));
        for (Eigen::Index t = 0; t < X.rows(); ++t) {
            const auto& idx = second ? obs.by_j(static_cast<std::size_t>(t)) : obs.by_k(static_cast<std::size_t>(t));
            CMatrix D(static_cast<Eigen::Index>(idx.size()), X.cols());
            CVector y(D.rows());
            for (Eigen::Index e = 0; e < D.rows(); ++e) {
                const auto& en = obs.entries()[idx[static_cast<std::size_t>(e)]];
                const auto other = static_cast<Eigen::Index>(second ? en.k : en.j);
                for (Eigen::Index f = 0; f < X.cols(); ++f) {
                    D(e, f) = P(static_cast<Eigen::Index>(en.i), f) * Q(other, f);
                }
                y(e) = en.value;
            }
            CMatrix G = st.lambda * D.adjoint() * D;
            G.diagonal().array() += beta * counts[static_cast<std::size_t>(t)];
            CVector rhs = st.lambda * D.adjoint() * y;
            for (Eigen::Index f = 0; f < X.cols(); ++f) rhs(f) += beta * s[static_cast<std::size_t>(f)](t);
            X.row(t) = G.ldlt().solve(rhs).transpose();
        }
    }

    void sweep() {
        update_A();
        update_mode(st.factors.B, st.factors.A, st.factors.C, true, st.E, st.M);
        update_mode(st.factors.C, st.factors.A, st.factors.B, false, st.Fa, st.N);
    }
};

AdmmState rand_cpd_state(std::mt19937_64& rng, Dims d, std::size_t F) {
    AdmmState st;
    st.factors = rand_factors(rng, d, BlockStructure::rank_one(F));
    const auto hj = hankel_shape(d.J);
    const auto hk = hankel_shape(d.K);
    for (std::size_t f = 0; f < F; ++f) {
        st.E.push_back(rand_matrix(rng, hj.n1, hj.n2));
        st.M.push_back(rand_matrix(rng, hj.n1, hj.n2));
        st.Fa.push_back(rand_matrix(rng, hk.n1, hk.n2));
        st.N.push_back(rand_matrix(rng, hk.n1, hk.n2));
    }
    st.beta = 0.6;
    st.lambda = 2.0;
    return st;
}

} // namespace

TEST_CASE("rank-one blocks reproduce a direct CPD ALS") {
    std::mt19937_64 rng(41);
    const Dims d{6, 7, 5};
    const ComplexTensor3 y = rand_tensor(rng, d);
    const ObservationMask w = rand_mask(rng, d, 0.5);
    const Observations obs(y, w);

    AdmmState st = rand_cpd_state(rng, d, 3);
    AdmmState ref = st;
    CpdReference cpd{obs, ref};
    for (int sweep = 0; sweep < 20; ++sweep) {
        update_factors(obs, st, Backend::ALS);
        cpd.sweep();
        CHECK((st.factors.A - ref.factors.A).norm() <= 1e-10 * ref.factors.A.norm());
        CHECK((st.factors.B - ref.factors.B).norm() <= 1e-10 * ref.factors.B.norm());
        CHECK((st.factors.C - ref.factors.C).norm() <= 1e-10 * ref.factors.C.norm());
    }
}
