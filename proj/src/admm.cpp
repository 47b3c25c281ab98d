#include "hbtc/admm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace hbtc {

void SolverConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda: must be a positive finite number");
    if (!(beta0 > 0.0) || !std::isfinite(beta0)) throw ConfigError("beta0: must be a positive finite number");
    if (!(rho_penalty > 1.0 && rho_penalty <= 1.1)) throw ConfigError("rho_penalty: must lie in (1.0, 1.1]");
    if (!(tol_rel_change >= 0.0)) throw ConfigError("tol_rel_change: must be nonnegative");
}

double svt_tau(double beta, SvtThreshold mode) {
    return mode == SvtThreshold::HalfInverseBeta ? 1.0 / (2.0 * beta) : 1.0 / beta;
}

namespace {

CVector harmonic(cplx generator, Eigen::Index n) {
    CVector v(n);
    cplx p{1.0, 0.0};
    for (Eigen::Index t = 0; t < n; ++t) {
        v(t) = p;
        p *= generator;
    }
    return v;
}

void reset_auxiliaries(AdmmState& s) {
    const BtdFactors& f = s.factors;
    s.E.clear();
    s.M.clear();
    s.Fa.clear();
    s.N.clear();
    for (Eigen::Index c = 0; c < f.B.cols(); ++c) {
        s.E.push_back(hankelize(f.B.col(c)));
        s.M.push_back(CMatrix::Zero(s.E.back().rows(), s.E.back().cols()));
    }
    for (Eigen::Index c = 0; c < f.C.cols(); ++c) {
        s.Fa.push_back(hankelize(f.C.col(c)));
        s.N.push_back(CMatrix::Zero(s.Fa.back().rows(), s.Fa.back().cols()));
    }
}

constexpr std::size_t kOversample = 8;

double circular_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
    return std::min(d, 2.0 * std::numbers::pi - d);
}

// Greedy peak picking on an oversampled periodogram with an exclusion radius of one DFT bin.
std::vector<double> pick_peaks(std::vector<double> power, std::size_t n, std::size_t count) {
    const std::size_t grid = power.size();
    const double step = 2.0 * std::numbers::pi / static_cast<double>(grid);
    const double exclusion = 2.0 * std::numbers::pi / static_cast<double>(n);
    std::vector<double> peaks;
    while (peaks.size() < count) {
        const auto best = static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
        if (power[best] < 0.0) {
            peaks.push_back(peaks.empty() ? 0.0 : peaks.back() + exclusion / 2.0);
            continue;
        }
        const double w = step * static_cast<double>(best);
        peaks.push_back(w);
        for (std::size_t g = 0; g < grid; ++g) {
            if (circular_distance(step * static_cast<double>(g), w) < exclusion) power[g] = -1.0;
        }
    }
    return peaks;
}

// Periodogram over one mode: power(w) = sum over the other two indices of |sum_t x_t e^{-i w t}|^2.
template <typename Index, typename Key>
std::vector<double> periodogram(const std::vector<std::pair<std::size_t, cplx>>& samples, std::size_t n,
                                std::size_t keys, Index index, Key key) {
    const std::size_t grid = kOversample * n;
    std::vector<double> power(grid, 0.0);
    std::vector<cplx> acc(keys);
    for (std::size_t g = 0; g < grid; ++g) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(g) / static_cast<double>(grid);
        std::fill(acc.begin(), acc.end(), cplx{0.0, 0.0});
        for (const auto& [pos, value] : samples) {
            acc[key(pos)] += value * std::polar(1.0, -w * static_cast<double>(index(pos)));
        }
        for (const cplx& a : acc) power[g] += std::norm(a);
    }
    return power;
}

void spectral_generators(const Observations& obs, const BlockStructure& structure, AdmmState& s) {
    const Dims d = obs.dims();
    std::vector<std::pair<std::size_t, cplx>> samples;
    samples.reserve(obs.count());
    for (const auto& e : obs.entries()) samples.emplace_back(e.i + d.I * (e.j + d.J * e.k), e.value);

    const auto k_of = [&](std::size_t p) { return p / (d.I * d.J); };
    const auto j_of = [&](std::size_t p) { return (p / d.I) % d.J; };
    const auto i_of = [&](std::size_t p) { return p % d.I; };
    const auto ij_of = [&](std::size_t p) { return p % (d.I * d.J); };

    const std::vector<double> delay = pick_peaks(periodogram(samples, d.K, d.I * d.J, k_of, ij_of), d.K,
                                                 structure.blocks());
    for (std::size_t r = 0; r < structure.blocks(); ++r) {
        const auto rc = static_cast<Eigen::Index>(r);
        s.factors.C.col(rc) = harmonic(std::polar(1.0, delay[r]), s.factors.C.rows());

        std::vector<std::pair<std::size_t, cplx>> demod;
        demod.reserve(samples.size());
        for (const auto& [pos, value] : samples) {
            demod.emplace_back(pos, value * std::conj(s.factors.C(static_cast<Eigen::Index>(k_of(pos)), rc)));
        }
        const std::size_t L = structure.size(r);
        const std::vector<double> doppler = pick_peaks(periodogram(demod, d.J, d.I, j_of, i_of), d.J, L);
        for (std::size_t l = 0; l < L; ++l) {
            s.factors.B.col(static_cast<Eigen::Index>(structure.col(r, l))) =
                harmonic(std::polar(1.0, doppler[l]), s.factors.B.rows());
        }
    }
}

void check_dims(const Dims& d, const BlockStructure& structure) {
    if (d.J < 2 || d.K < 2) throw ConfigError("dims: J and K must be at least 2 for hankelization");
    if (structure.columns() > d.J * d.K) {
        throw ConfigError("blocks: total column count F=" + std::to_string(structure.columns()) + " exceeds J*K");
    }
}

} // namespace

AdmmState init_state(const Observations& obs, const BlockStructure& structure, const SolverConfig& config) {
    config.validate();
    const Dims d = obs.dims();
    check_dims(d, structure);
    if (obs.count() == 0) throw ConfigError("mask: no observed entries");

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

    const auto F = static_cast<Eigen::Index>(structure.columns());
    const auto R = static_cast<Eigen::Index>(structure.blocks());
    AdmmState s;
    s.factors.structure = structure;
    s.factors.A.resize(d.I, F);
    s.factors.B.resize(d.J, F);
    s.factors.C.resize(d.K, R);

    const double scale = obs.norm() / std::sqrt(static_cast<double>(obs.count()));
    for (Eigen::Index f = 0; f < F; ++f) {
        for (Eigen::Index i = 0; i < s.factors.A.rows(); ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            s.factors.A(i, f) = scale * cplx(re, im) / std::numbers::sqrt2;
        }
    }
    for (Eigen::Index f = 0; f < F; ++f) {
        s.factors.B.col(f) = harmonic(std::polar(1.0, angle(rng)), s.factors.B.rows());
    }
    for (Eigen::Index r = 0; r < R; ++r) {
        s.factors.C.col(r) = harmonic(std::polar(1.0, angle(rng)), s.factors.C.rows());
    }
    if (config.init == InitMode::Spectral) spectral_generators(obs, structure, s);

    s.beta = config.beta0;
    s.lambda = config.lambda;
    reset_auxiliaries(s);
    return s;
}

AdmmState init_state(const BtdFactors& factors, const SolverConfig& config) {
    config.validate();
    factors.validate();
    check_dims(factors.dims(), factors.structure);
    if (!factors.all_finite()) throw ConfigError("init: provided factors contain non-finite entries");
    AdmmState s;
    s.factors = factors;
    s.beta = config.beta0;
    s.lambda = config.lambda;
    reset_auxiliaries(s);
    return s;
}

void admm_iterate(const Observations& obs, AdmmState& state, const SolverConfig& config) {
    try {
        update_factors(obs, state, config.backend);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("step (a) factor update: ") + e.what());
    }
    if (!state.factors.all_finite()) throw NumericalError("step (a) factor update: non-finite factors");

    const double beta = state.beta;
    const double tau = svt_tau(beta, config.svt_threshold);
    const BtdFactors& f = state.factors;

    std::vector<CMatrix> hb(static_cast<std::size_t>(f.B.cols()));
    std::vector<CMatrix> hc(static_cast<std::size_t>(f.C.cols()));
    try {
        for (std::size_t c = 0; c < hb.size(); ++c) {
            hb[c] = hankelize(f.B.col(c));
            state.E[c] = svt(hb[c] + state.M[c] / beta, tau);
        }
        for (std::size_t c = 0; c < hc.size(); ++c) {
            hc[c] = hankelize(f.C.col(c));
            state.Fa[c] = svt(hc[c] + state.N[c] / beta, tau);
        }
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("step (b) SVT: ") + e.what());
    }

    for (std::size_t c = 0; c < hb.size(); ++c) state.M[c] += beta * (hb[c] - state.E[c]);
    for (std::size_t c = 0; c < hc.size(); ++c) state.N[c] += beta * (hc[c] - state.Fa[c]);
    for (const auto* list : {&state.M, &state.N}) {
        for (const auto& m : *list) {
            if (!m.allFinite()) throw NumericalError("step (c) multiplier update: non-finite multipliers");
        }
    }

    state.beta *= config.rho_penalty;
    if (!std::isfinite(state.beta)) throw NumericalError("step (d) penalty update: beta overflowed");
    ++state.iteration;
}

SolveReport solve(const ComplexTensor3& y, const ObservationMask& w, const BlockStructure& structure,
                  const SolverConfig& config, const std::optional<BtdFactors>& initial) {
    config.validate();
    if (w.observed_count() == 0) throw ConfigError("mask: no observed entries");
    const Observations obs(y, w);

    AdmmState state;
    if (config.init == InitMode::Provided) {
        if (!initial) throw ConfigError("init: 'provided' requires initial factors");
        if (!(initial->structure == structure) || !(initial->dims() == y.dims())) {
            throw ConfigError("init: provided factors do not match dims/blocks");
        }
        state = init_state(*initial, config);
    } else {
        state = init_state(obs, structure, config);
    }

    SolveReport report;
    report.initial_f1 = eval_f1(obs, state.factors);
    ComplexTensor3 current = reconstruct(state.factors);

    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        admm_iterate(obs, state, config);
        ComplexTensor3 next = reconstruct(state.factors);
        const double base = current.frobenius_norm();
        const double change = (next - current).frobenius_norm();
        const double rel = base > 0.0 ? change / base : (change > 0.0 ? 1.0 : 0.0);
        current = std::move(next);

        TraceRow row;
        row.iter = state.iteration;
        row.f1 = eval_f1(obs, state.factors);
        row.f2 = eval_f2(state.factors);
        row.f_lag = eval_lagrangian(obs, state);
        row.beta = state.beta;
        row.rel_change = rel;
        report.trace.push_back(row);
        ++report.iterations_run;

        // A rejected trust-region step leaves the tensor unchanged without being converged.
        if (rel < config.tol_rel_change && state.last_step_accepted) {
            report.converged = true;
            break;
        }
    }

    if (config.data_consistency) {
        for (std::size_t n = 0; n < current.size(); ++n) {
            if (w.observed(n)) current[n] = y[n];
        }
    }
    report.completed = std::move(current);
    report.final_constraint_residual = constraint_residual(state);
    report.factors = std::move(state.factors);
    return report;
}

double harmonicity(const BtdFactors& factors) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const CMatrix* m : {&factors.B, &factors.C}) {
        for (Eigen::Index c = 0; c < m->cols(); ++c) {
            const CMatrix h = hankelize(m->col(c));
            const double fro = h.norm();
            sum += fro > 0.0 ? singular_values(h)(0) / fro : 0.0;
            ++count;
        }
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
    out << "iter,f1,f2,f_lag,beta,rel_change\n";
    char buf[256];
    for (const auto& r : trace) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.f1, r.f2, r.f_lag, r.beta,
                      r.rel_change);
        out << buf;
    }
}

} // namespace hbtc
