#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hbtc/admm.hpp"
#include "hbtc/hankel.hpp"
#include "hbtc/synth.hpp"
#include "test_util.hpp"

using namespace hbtc;
using namespace hbtc::testing;

namespace {

GroundTruth small_truth(std::uint64_t seed, double ratio, std::vector<std::size_t> blocks = {1, 1}) {
    GenConfig g;
    g.dims = {10, 10, 10};
    g.structure = BlockStructure(blocks);
    g.sample_ratio = ratio;
    g.seed = seed;
    return generate(g);
}

double circular(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
    return std::min(d, 2.0 * std::numbers::pi - d);
}

} // namespace

TEST_CASE("config validation names the field") {
    SolverConfig c;
    c.rho_penalty = 1.2;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("rho_penalty"), ConfigError);
    c = {};
    c.lambda = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("lambda"), ConfigError);
    c = {};
    c.beta0 = -1.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("beta0"), ConfigError);
}

TEST_CASE("svt threshold modes") {
    CHECK(svt_tau(0.5, SvtThreshold::HalfInverseBeta) == 1.0);
    CHECK(svt_tau(0.5, SvtThreshold::InverseBeta) == 2.0);
}

TEST_CASE("one iteration: prox, multiplier ascent and penalty growth") {
    std::mt19937_64 rng(51);
    const GroundTruth gt = small_truth(3, 0.4);
    const Observations obs(gt.noisy, gt.mask);
    SolverConfig cfg;
    cfg.beta0 = 0.7;
    AdmmState st = init_state(obs, gt.factors.structure, cfg);
    for (auto& m : st.M) m = rand_matrix(rng, m.rows(), m.cols());
    const std::vector<CMatrix> m_old = st.M;
    const double beta = st.beta;

    admm_iterate(obs, st, cfg);
    CHECK(st.beta == doctest::Approx(beta * cfg.rho_penalty).epsilon(1e-15));

    for (std::size_t c = 0; c < st.E.size(); ++c) {
        const CMatrix hb = hankelize(st.factors.B.col(static_cast<Eigen::Index>(c)));
        const CMatrix target = hb + m_old[c] / beta;
        const auto phi = [&](const CMatrix& e) { return nuclear_norm(e) + beta * (target - e).squaredNorm(); };
        const double best = phi(st.E[c]);
        for (int rep = 0; rep < 200; ++rep) {
            const double scale = rep < 100 ? 1e-3 : 1e-1;
            CHECK(phi(st.E[c] + scale * rand_matrix(rng, hb.rows(), hb.cols())) >= best - 1e-12);
        }
        CHECK((st.M[c] - (m_old[c] + beta * (hb - st.E[c]))).norm() <= 1e-12 * (1.0 + st.M[c].norm()));
    }
}

TEST_CASE("solve records a geometric penalty schedule") {
    const GroundTruth gt = small_truth(4, 0.5);
    SolverConfig cfg;
    cfg.max_iterations = 40;
    cfg.tol_rel_change = 0.0;
    const SolveReport rep = solve(gt.noisy, gt.mask, gt.factors.structure, cfg);
    REQUIRE(rep.trace.size() == 40);
    for (const TraceRow& row : rep.trace) {
        CHECK(row.beta == doctest::Approx(cfg.beta0 * std::pow(cfg.rho_penalty, static_cast<double>(row.iter)))
                              .epsilon(1e-12));
    }
    CHECK(rep.iterations_run == 40);
}

TEST_CASE("zero iterations returns the initial reconstruction") {
    const GroundTruth gt = small_truth(5, 0.5);
    SolverConfig cfg;
    cfg.max_iterations = 0;
    cfg.init = InitMode::Provided;
    const SolveReport rep = solve(gt.noisy, gt.mask, gt.factors.structure, cfg, gt.factors);
    CHECK(rep.iterations_run == 0);
    CHECK(rep.trace.empty());
    CHECK((rep.completed - gt.clean).frobenius_norm() <= 1e-12 * gt.clean.frobenius_norm());
}

TEST_CASE("identical inputs give identical traces") {
    const GroundTruth gt = small_truth(6, 0.4);
    SolverConfig cfg;
    cfg.max_iterations = 60;
    const SolveReport a = solve(gt.noisy, gt.mask, gt.factors.structure, cfg);
    const SolveReport b = solve(gt.noisy, gt.mask, gt.factors.structure, cfg);
    std::ostringstream sa, sb;
    write_trace_csv(sa, a.trace);
    write_trace_csv(sb, b.trace);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("iter,f1,f2,f_lag,beta,rel_change\n", 0) == 0);
}

TEST_CASE("noiseless recovery with both backends") {
    const GroundTruth gt = small_truth(7, 0.5);
    for (Backend backend : {Backend::ALS, Backend::GN}) {
        CAPTURE(to_string(backend));
        SolverConfig cfg;
        cfg.backend = backend;
        cfg.max_iterations = 300;
        const SolveReport rep = solve(gt.noisy, gt.mask, gt.factors.structure, cfg);
        CHECK(rlne(rep.completed, gt.clean) < 1e-2);
        CHECK(rep.final_constraint_residual < 1e-3);
        CHECK(harmonicity(rep.factors) > 0.999);
    }
}

TEST_CASE("data consistency keeps the observed entries") {
    const GroundTruth gt = small_truth(8, 0.3);
    SolverConfig cfg;
    cfg.max_iterations = 20;
    cfg.data_consistency = true;
    const SolveReport rep = solve(gt.noisy, gt.mask, gt.factors.structure, cfg);
    for (std::size_t n = 0; n < gt.mask.size(); ++n) {
        if (gt.mask.observed(n)) CHECK(rep.completed[n] == gt.noisy[n]);
    }
}

TEST_CASE("spectral start finds the third-mode generators") {
    GenConfig g;
    g.dims = {8, 10, 40};
    g.structure = BlockStructure({2, 2, 2});
    g.sample_ratio = 0.3;
    g.seed = 9;
    const GroundTruth gt = generate(g);
    SolverConfig cfg;
    cfg.init = InitMode::Spectral;
    const AdmmState st = init_state(Observations(gt.noisy, gt.mask), g.structure, cfg);
    for (Eigen::Index r = 0; r < gt.factors.C.cols(); ++r) {
        const double truth = std::arg(gt.factors.C(1, r) / gt.factors.C(0, r));
        double nearest = 10.0;
        for (Eigen::Index q = 0; q < st.factors.C.cols(); ++q) {
            nearest = std::min(nearest, circular(truth, std::arg(st.factors.C(1, q))));
        }
        CHECK(nearest < std::numbers::pi / 40.0);
    }
    CHECK(harmonicity(st.factors) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solver input errors") {
    const GroundTruth gt = small_truth(10, 0.3);
    SolverConfig cfg;
    CHECK_THROWS_AS(solve(gt.noisy, ObservationMask(gt.noisy.dims(), false), gt.factors.structure, cfg), ConfigError);
    cfg.init = InitMode::Provided;
    CHECK_THROWS_AS(solve(gt.noisy, gt.mask, gt.factors.structure, cfg), ConfigError);
    cfg.init = InitMode::Random;
    CHECK_THROWS_AS(solve(gt.noisy, gt.mask, BlockStructure::rank_one(101), cfg), ConfigError);
}
