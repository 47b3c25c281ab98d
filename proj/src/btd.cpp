#include "hbtc/btd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hbtc {

BlockStructure::BlockStructure(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw ConfigError("blocks: at least one block is required");
    std::size_t offset = 0;
    for (std::size_t r = 0; r < sizes_.size(); ++r) {
        if (sizes_[r] == 0) throw ConfigError("blocks: every block size must be >= 1");
        first_.push_back(offset);
        for (std::size_t l = 0; l < sizes_[r]; ++l) owner_.push_back(r);
        offset += sizes_[r];
    }
}

BlockStructure BlockStructure::rank_one(std::size_t count) {
    return BlockStructure(std::vector<std::size_t>(count, 1));
}

void BtdFactors::validate() const {
    const auto F = static_cast<Eigen::Index>(structure.columns());
    const auto R = static_cast<Eigen::Index>(structure.blocks());
    if (A.cols() != F || B.cols() != F || C.cols() != R) {
        throw ShapeError("BtdFactors: column counts (" + std::to_string(A.cols()) + ", " + std::to_string(B.cols()) +
                         ", " + std::to_string(C.cols()) + ") do not match structure F=" + std::to_string(F) +
                         ", R=" + std::to_string(R));
    }
}

cplx BtdFactors::entry(std::size_t i, std::size_t j, std::size_t k) const {
    cplx s{0.0, 0.0};
    for (std::size_t r = 0; r < structure.blocks(); ++r) {
        cplx block{0.0, 0.0};
        const std::size_t f0 = structure.first(r);
        for (std::size_t l = 0; l < structure.size(r); ++l) block += A(i, f0 + l) * B(j, f0 + l);
        s += block * C(k, r);
    }
    return s;
}

Observations::Observations(const ComplexTensor3& y, const ObservationMask& w)
    : dims_(y.dims()), by_i_(dims_.I), by_j_(dims_.J), by_k_(dims_.K) {
    if (!(y.dims() == w.dims())) throw ShapeError("Observations: tensor and mask dims differ");
    entries_.reserve(w.observed_count());
    double s = 0.0;
    for (std::size_t k = 0; k < dims_.K; ++k) {
        for (std::size_t j = 0; j < dims_.J; ++j) {
            for (std::size_t i = 0; i < dims_.I; ++i) {
                if (!w.observed(i, j, k)) continue;
                const std::size_t n = entries_.size();
                entries_.push_back({i, j, k, y(i, j, k)});
                by_i_[i].push_back(n);
                by_j_[j].push_back(n);
                by_k_[k].push_back(n);
                s += std::norm(y(i, j, k));
            }
        }
    }
    norm_ = std::sqrt(s);
}

void AdmmState::validate() const {
    factors.validate();
    const auto F = factors.structure.columns();
    const auto R = factors.structure.blocks();
    if (E.size() != F || M.size() != F || Fa.size() != R || N.size() != R) {
        throw ShapeError("AdmmState: auxiliary/multiplier counts do not match the block structure");
    }
    if (!(beta > 0.0)) throw ConfigError("beta: must be positive");
}

ComplexTensor3 reconstruct(const BtdFactors& factors) {
    factors.validate();
    const Dims d = factors.dims();
    const BlockStructure& s = factors.structure;
    ComplexTensor3 out(d);
    // Slice k is sum_r C(k,r) A_r B_r^T.
    std::vector<CMatrix> slices;
    slices.reserve(s.blocks());
    for (std::size_t r = 0; r < s.blocks(); ++r) {
        const auto f0 = static_cast<Eigen::Index>(s.first(r));
        const auto L = static_cast<Eigen::Index>(s.size(r));
        slices.push_back(factors.A.middleCols(f0, L) * factors.B.middleCols(f0, L).transpose());
    }
    CMatrix slice(d.I, d.J);
    for (std::size_t k = 0; k < d.K; ++k) {
        slice.setZero();
        for (std::size_t r = 0; r < s.blocks(); ++r) slice += factors.C(k, r) * slices[r];
        for (std::size_t j = 0; j < d.J; ++j) {
            for (std::size_t i = 0; i < d.I; ++i) out(i, j, k) = slice(i, j);
        }
    }
    return out;
}

double eval_f1(const ComplexTensor3& y, const ObservationMask& w, const BtdFactors& factors) {
    if (!(factors.dims() == y.dims())) throw ShapeError("eval_f1: factor dims do not match the tensor");
    return masked_sq_error(y, w, reconstruct(factors));
}

double eval_f1(const Observations& obs, const BtdFactors& factors) {
    if (!(factors.dims() == obs.dims())) throw ShapeError("eval_f1: factor dims do not match the tensor");
    double s = 0.0;
    for (const auto& e : obs.entries()) s += std::norm(e.value - factors.entry(e.i, e.j, e.k));
    return s;
}

double eval_f2(const BtdFactors& factors) {
    factors.validate();
    double s = factors.A.squaredNorm();
    for (Eigen::Index f = 0; f < factors.B.cols(); ++f) s += nuclear_norm(hankelize(factors.B.col(f)));
    for (Eigen::Index r = 0; r < factors.C.cols(); ++r) s += nuclear_norm(hankelize(factors.C.col(r)));
    return s;
}

namespace {

// sum <Mult, H(x) - Aux> + beta ||H(x) - Aux||^2 over the columns of x.
double coupling_terms(const CMatrix& x, const std::vector<CMatrix>& aux, const std::vector<CMatrix>& mult,
                      double beta) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const CMatrix diff = hankelize(x.col(c)) - aux[c];
        if (diff.rows() != mult[c].rows() || diff.cols() != mult[c].cols()) {
            throw ShapeError("eval_lagrangian: multiplier shape does not match the Hankel shape");
        }
        s += inner_re(mult[c], diff) + beta * diff.squaredNorm();
    }
    return s;
}

double penalty_terms(const CMatrix& x, const std::vector<CMatrix>& aux, const std::vector<CMatrix>& mult,
                     double beta) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        s += (hankelize(x.col(c)) - aux[c] + mult[c] / beta).squaredNorm();
    }
    return beta * s;
}

} // namespace

double eval_lagrangian(const Observations& obs, const AdmmState& state) {
    state.validate();
    const BtdFactors& f = state.factors;
    return state.lambda * eval_f1(obs, f) + f.A.squaredNorm() + coupling_terms(f.B, state.E, state.M, state.beta) +
           coupling_terms(f.C, state.Fa, state.N, state.beta);
}

double eval_lagrangian(const ComplexTensor3& y, const ObservationMask& w, const AdmmState& state) {
    return eval_lagrangian(Observations(y, w), state);
}

double eval_g(const Observations& obs, const AdmmState& state, const BtdFactors& factors) {
    return state.lambda * eval_f1(obs, factors) + factors.A.squaredNorm() +
           penalty_terms(factors.B, state.E, state.M, state.beta) +
           penalty_terms(factors.C, state.Fa, state.N, state.beta);
}

double eval_g(const Observations& obs, const AdmmState& state) { return eval_g(obs, state, state.factors); }

double constraint_residual(const AdmmState& state) {
    double worst = 0.0;
    const auto check = [&](const CMatrix& x, const std::vector<CMatrix>& aux) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double r = (hankelize(x.col(c)) - aux[c]).norm() / (1.0 + aux[c].norm());
            worst = std::max(worst, r);
        }
    };
    check(state.factors.B, state.E);
    check(state.factors.C, state.Fa);
    return worst;
}

} // namespace hbtc
