#include "hbtc/factor_update.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace hbtc {

std::string_view to_string(Backend b) { return b == Backend::ALS ? "als" : "gn"; }

Backend parse_backend(std::string_view s) {
    if (s == "als" || s == "ALS") return Backend::ALS;
    if (s == "gn" || s == "GN" || s == "nls" || s == "NLS") return Backend::GN;
    throw ConfigError("backend: expected 'als' or 'gn', got '" + std::string(s) + "'");
}

namespace {

// Solves (lambda * sum conj(d) d^T + diag * I) x = lambda * sum conj(d) y + rhs_extra.
class RowSystem {
public:
    explicit RowSystem(Eigen::Index n) : gram_(CMatrix::Zero(n, n)), rhs_(CVector::Zero(n)), d_(n) {}

    CVector& design() { return d_; }

    void accumulate(cplx y) {
        gram_.selfadjointView<Eigen::Lower>().rankUpdate(d_.conjugate());
        rhs_ += d_.conjugate() * y;
    }

    CVector solve(double lambda, double diag, const CVector& extra, const char* what) {
        CMatrix lhs = lambda * gram_.selfadjointView<Eigen::Lower>().toDenseMatrix();
        lhs.diagonal().array() += diag;
        Eigen::LLT<CMatrix> llt(lhs);
        if (llt.info() != Eigen::Success) {
            throw NumericalError(std::string(what) + ": normal matrix is not positive definite");
        }
        return llt.solve(lambda * rhs_ + extra);
    }

private:
    CMatrix gram_;
    CVector rhs_;
    CVector d_;
};

// Column f of the linear Hankel term, s_f = H^*(Aux_f - Mult_f / beta).
CMatrix hankel_targets(const std::vector<CMatrix>& aux, const std::vector<CMatrix>& mult, double beta,
                       Eigen::Index length) {
    CMatrix s(length, static_cast<Eigen::Index>(aux.size()));
    for (std::size_t c = 0; c < aux.size(); ++c) s.col(c) = hankel_adjoint(aux[c] - mult[c] / beta);
    return s;
}

void require_finite(const CMatrix& m, const char* what) {
    if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite factor entries");
}

} // namespace

void als_update_A(const Observations& obs, AdmmState& state) {
    BtdFactors& fac = state.factors;
    const BlockStructure& s = fac.structure;
    const Dims d = obs.dims();
    const auto F = static_cast<Eigen::Index>(s.columns());
    const CVector none = CVector::Zero(F);
    for (std::size_t i = 0; i < d.I; ++i) {
        RowSystem sys(F);
        for (std::size_t n : obs.by_i(i)) {
            const auto& e = obs.entries()[n];
            for (Eigen::Index f = 0; f < F; ++f) sys.design()(f) = fac.B(e.j, f) * fac.C(e.k, s.block_of(f));
            sys.accumulate(e.value);
        }
        fac.A.row(i) = sys.solve(state.lambda, 1.0, none, "als_update_A").transpose();
    }
    require_finite(fac.A, "als_update_A");
}

void als_update_B(const Observations& obs, AdmmState& state) {
    BtdFactors& fac = state.factors;
    const BlockStructure& s = fac.structure;
    const Dims d = obs.dims();
    const auto F = static_cast<Eigen::Index>(s.columns());
    const auto counts = hankel_counts(d.J);
    const CMatrix targets = hankel_targets(state.E, state.M, state.beta, static_cast<Eigen::Index>(d.J));
    for (std::size_t j = 0; j < d.J; ++j) {
        RowSystem sys(F);
        for (std::size_t n : obs.by_j(j)) {
            const auto& e = obs.entries()[n];
            for (Eigen::Index f = 0; f < F; ++f) sys.design()(f) = fac.A(e.i, f) * fac.C(e.k, s.block_of(f));
            sys.accumulate(e.value);
        }
        const CVector extra = state.beta * targets.row(j).transpose();
        fac.B.row(j) = sys.solve(state.lambda, state.beta * counts[j], extra, "als_update_B").transpose();
    }
    require_finite(fac.B, "als_update_B");
}

void als_update_C(const Observations& obs, AdmmState& state) {
    BtdFactors& fac = state.factors;
    const BlockStructure& s = fac.structure;
    const Dims d = obs.dims();
    const auto R = static_cast<Eigen::Index>(s.blocks());
    const auto counts = hankel_counts(d.K);
    const CMatrix targets = hankel_targets(state.Fa, state.N, state.beta, static_cast<Eigen::Index>(d.K));
    for (std::size_t k = 0; k < d.K; ++k) {
        RowSystem sys(R);
        for (std::size_t n : obs.by_k(k)) {
            const auto& e = obs.entries()[n];
            for (Eigen::Index r = 0; r < R; ++r) {
                cplx acc{0.0, 0.0};
                const std::size_t f0 = s.first(r);
                for (std::size_t l = 0; l < s.size(r); ++l) acc += fac.A(e.i, f0 + l) * fac.B(e.j, f0 + l);
                sys.design()(r) = acc;
            }
            sys.accumulate(e.value);
        }
        const CVector extra = state.beta * targets.row(k).transpose();
        fac.C.row(k) = sys.solve(state.lambda, state.beta * counts[k], extra, "als_update_C").transpose();
    }
    require_finite(fac.C, "als_update_C");
}

Eigen::VectorXd pack(const BtdFactors& factors) {
    const Eigen::Index na = factors.A.size();
    const Eigen::Index nb = factors.B.size();
    const Eigen::Index nc = factors.C.size();
    Eigen::VectorXd z(2 * (na + nb + nc));
    Eigen::Index e = 0;
    for (const CMatrix* m : {&factors.A, &factors.B, &factors.C}) {
        for (Eigen::Index n = 0; n < m->size(); ++n, ++e) {
            z(2 * e) = m->data()[n].real();
            z(2 * e + 1) = m->data()[n].imag();
        }
    }
    return z;
}

BtdFactors unpack(const Eigen::VectorXd& z, const Dims& dims, const BlockStructure& structure) {
    const auto F = static_cast<Eigen::Index>(structure.columns());
    const auto R = static_cast<Eigen::Index>(structure.blocks());
    BtdFactors out{CMatrix(dims.I, F), CMatrix(dims.J, F), CMatrix(dims.K, R), structure};
    const Eigen::Index total = out.A.size() + out.B.size() + out.C.size();
    if (z.size() != 2 * total) throw ShapeError("unpack: packed vector length does not match the factor shapes");
    Eigen::Index e = 0;
    for (CMatrix* m : {&out.A, &out.B, &out.C}) {
        for (Eigen::Index n = 0; n < m->size(); ++n, ++e) m->data()[n] = cplx(z(2 * e), z(2 * e + 1));
    }
    return out;
}

Eigen::VectorXd residual(const Observations& obs, const BtdFactors& factors) {
    Eigen::VectorXd r(2 * static_cast<Eigen::Index>(obs.count()));
    Eigen::Index n = 0;
    for (const auto& e : obs.entries()) {
        const cplx v = factors.entry(e.i, e.j, e.k) - e.value;
        r(n++) = v.real();
        r(n++) = v.imag();
    }
    return r;
}

Eigen::SparseMatrix<double> jacobian(const Observations& obs, const BtdFactors& factors) {
    const BlockStructure& s = factors.structure;
    const Dims d = obs.dims();
    const std::size_t F = s.columns();
    const std::size_t R = s.blocks();
    const std::size_t off_b = d.I * F;
    const std::size_t off_c = off_b + d.J * F;
    const auto nvars = static_cast<Eigen::Index>(2 * (off_c + d.K * R));

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(obs.count() * 4 * (2 * F + R));
    const auto add = [&](Eigen::Index row, std::size_t entry, cplx deriv) {
        const auto col = static_cast<Eigen::Index>(2 * entry);
        // d/dRe x = deriv, d/dIm x = i * deriv.
        trips.emplace_back(row, col, deriv.real());
        trips.emplace_back(row + 1, col, deriv.imag());
        trips.emplace_back(row, col + 1, -deriv.imag());
        trips.emplace_back(row + 1, col + 1, deriv.real());
    };

    Eigen::Index row = 0;
    for (const auto& e : obs.entries()) {
        for (std::size_t r = 0; r < R; ++r) {
            const cplx ck = factors.C(e.k, r);
            cplx block{0.0, 0.0};
            for (std::size_t l = 0; l < s.size(r); ++l) {
                const std::size_t f = s.col(r, l);
                const cplx a = factors.A(e.i, f);
                const cplx b = factors.B(e.j, f);
                add(row, e.i + d.I * f, b * ck);
                add(row, off_b + e.j + d.J * f, a * ck);
                block += a * b;
            }
            add(row, off_c + e.k + d.K * r, block);
        }
        row += 2;
    }
    Eigen::SparseMatrix<double> J(2 * static_cast<Eigen::Index>(obs.count()), nvars);
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
}

QuadraticTerm penalty_quadratic(const AdmmState& state) {
    const BtdFactors& fac = state.factors;
    const Dims d = fac.dims();
    const double beta = state.beta;
    const Eigen::VectorXd z = pack(fac);
    QuadraticTerm q{Eigen::VectorXd(z.size()), Eigen::VectorXd(z.size())};

    Eigen::Index e = 0;
    for (Eigen::Index n = 0; n < fac.A.size(); ++n, ++e) {
        q.gradient(2 * e) = 2.0 * z(2 * e);
        q.gradient(2 * e + 1) = 2.0 * z(2 * e + 1);
        q.hessian_diag(2 * e) = q.hessian_diag(2 * e + 1) = 2.0;
    }
    const auto hankel_part = [&](const CMatrix& x, const std::vector<CMatrix>& aux, const std::vector<CMatrix>& mult,
                                 std::size_t length) {
        const auto counts = hankel_counts(length);
        const CMatrix targets = hankel_targets(aux, mult, beta, static_cast<Eigen::Index>(length));
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            for (Eigen::Index t = 0; t < x.rows(); ++t, ++e) {
                const cplx g = 2.0 * beta * (counts[t] * x(t, c) - targets(t, c));
                q.gradient(2 * e) = g.real();
                q.gradient(2 * e + 1) = g.imag();
                q.hessian_diag(2 * e) = q.hessian_diag(2 * e + 1) = 2.0 * beta * counts[t];
            }
        }
    };
    hankel_part(fac.B, state.E, state.M, d.J);
    hankel_part(fac.C, state.Fa, state.N, d.K);
    return q;
}

void gn_step(const Observations& obs, AdmmState& state, GnWorkspace& ws, const TrustRegionParams& params) {
    const BtdFactors& fac = state.factors;
    const Dims d = obs.dims();
    const double lambda = state.lambda;

    ws.z = pack(fac);
    ws.r = residual(obs, fac);
    ws.J = jacobian(obs, fac);
    const QuadraticTerm q = penalty_quadratic(state);

    const Eigen::VectorXd grad = 2.0 * lambda * (ws.J.transpose() * ws.r) + q.gradient;
    const Eigen::Index nvars = ws.z.size();

    ws.accepted = false;
    ws.ratio = 0.0;
    ws.predicted_decrease = 0.0;
    ws.actual_decrease = 0.0;
    ws.step = Eigen::VectorXd::Zero(nvars);

    const double gnorm = grad.norm();
    if (gnorm == 0.0) return;
    if (!std::isfinite(gnorm)) {
        ws.trust_radius *= params.shrink_factor;
        return;
    }

    // Model Hessian 2 lambda J^T J + diag(h''). Each observation couples rows of
    // A, B and C, so at small sizes the matrix is effectively dense.
    Eigen::VectorXd newton;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_hessian;
    Eigen::MatrixXd dense;
    Eigen::SparseMatrix<double> sparse;
    if (static_cast<std::size_t>(nvars) <= params.dense_solve_limit) {
        dense = Eigen::MatrixXd::Zero(nvars, nvars);
        const Eigen::SparseMatrix<double, Eigen::RowMajor> jr = ws.J;
        std::vector<std::pair<Eigen::Index, double>> nz;
        for (Eigen::Index row = 0; row < jr.outerSize(); ++row) {
            nz.clear();
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(jr, row); it; ++it) {
                nz.emplace_back(it.col(), it.value());
            }
            for (const auto& [c1, v1] : nz) {
                for (const auto& [c2, v2] : nz) {
                    if (c2 <= c1) dense(c1, c2) += 2.0 * lambda * v1 * v2;
                }
            }
        }
        dense.diagonal() += q.hessian_diag;
        dense.triangularView<Eigen::StrictlyUpper>() = dense.transpose();
        Eigen::LLT<Eigen::MatrixXd> llt(dense);
        if (llt.info() != Eigen::Success) throw NumericalError("gn_step: model Hessian is not positive definite");
        newton = llt.solve(-grad);
        apply_hessian = [&dense](const Eigen::VectorXd& v) -> Eigen::VectorXd { return dense * v; };
    } else {
        sparse = (2.0 * lambda) * Eigen::SparseMatrix<double>(ws.J.transpose() * ws.J);
        Eigen::SparseMatrix<double> D(nvars, nvars);
        std::vector<Eigen::Triplet<double>> diag;
        diag.reserve(static_cast<std::size_t>(nvars));
        for (Eigen::Index n = 0; n < nvars; ++n) diag.emplace_back(n, n, q.hessian_diag(n));
        D.setFromTriplets(diag.begin(), diag.end());
        sparse += D;
        if (d.size() <= params.direct_solve_limit) {
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sparse);
            if (ldlt.info() != Eigen::Success) {
                throw NumericalError("gn_step: factorization of the model Hessian failed");
            }
            newton = ldlt.solve(-grad);
        } else {
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
            cg.setMaxIterations(params.cg_max_iterations);
            cg.compute(sparse);
            newton = cg.solve(-grad);
        }
        apply_hessian = [&sparse](const Eigen::VectorXd& v) -> Eigen::VectorXd { return sparse * v; };
    }

    const double delta = ws.trust_radius;
    Eigen::VectorXd p;
    if (newton.allFinite() && newton.norm() <= delta) {
        p = newton;
    } else {
        const double curv = grad.dot(apply_hessian(grad));
        const Eigen::VectorXd cauchy = -(gnorm * gnorm / curv) * grad;
        if (!newton.allFinite() || !(curv > 0.0) || cauchy.norm() >= delta) {
            p = -(delta / gnorm) * grad;
        } else {
            const Eigen::VectorXd dir = newton - cauchy;
            const double a = dir.squaredNorm();
            const double b = 2.0 * cauchy.dot(dir);
            const double c = cauchy.squaredNorm() - delta * delta;
            const double tau = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
            p = cauchy + tau * dir;
        }
    }
    ws.step = p;

    const double g_old = eval_g(obs, state);
    ws.predicted_decrease = -(grad.dot(p) + 0.5 * p.dot(apply_hessian(p)));
    if (!(ws.predicted_decrease > 1e-15 * (1.0 + std::abs(g_old)))) {
        // Already at the model minimizer up to rounding.
        if (!std::isfinite(ws.predicted_decrease)) ws.trust_radius *= params.shrink_factor;
        return;
    }

    BtdFactors trial = unpack(ws.z + p, d, fac.structure);
    const double g_new = trial.all_finite() ? eval_g(obs, state, trial) : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(g_new)) {
        ws.trust_radius *= params.shrink_factor;
        return;
    }
    ws.actual_decrease = g_old - g_new;
    ws.ratio = ws.actual_decrease / ws.predicted_decrease;

    if (ws.ratio > params.accept) {
        state.factors = std::move(trial);
        ws.accepted = true;
    }
    if (ws.ratio < params.shrink_below) {
        ws.trust_radius *= params.shrink_factor;
    } else if (ws.ratio > params.expand_above && p.norm() >= 0.99 * delta) {
        ws.trust_radius *= params.expand_factor;
    }
}

void update_factors(const Observations& obs, AdmmState& state, Backend backend) {
    if (backend == Backend::ALS) {
        als_update_A(obs, state);
        als_update_B(obs, state);
        als_update_C(obs, state);
        return;
    }
    GnWorkspace ws;
    ws.trust_radius = state.trust_radius;
    gn_step(obs, state, ws);
    state.trust_radius = ws.trust_radius;
    state.last_step_accepted = ws.accepted;
}

} // namespace hbtc
