#include "hbtc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace hbtc {

namespace {

// Independent streams per purpose so that noise and mask do not shift when
// the factor draw changes.
enum Stream : std::uint64_t { kFactors = 1, kNoise = 2, kMask = 3 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

cplx complex_gaussian(std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double re = normal(rng);
    const double im = normal(rng);
    return cplx(re, im) / std::numbers::sqrt2;
}

void fill_harmonic(CMatrix& m, Eigen::Index col, cplx generator) {
    cplx p{1.0, 0.0};
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        m(t, col) = p;
        p *= generator;
    }
}

} // namespace

void GenConfig::validate() const {
    if (dims.I == 0 || dims.J < 2 || dims.K < 2) throw ConfigError("dims: need I >= 1 and J, K >= 2");
    if (!(sample_ratio > 0.0 && sample_ratio <= 1.0)) throw ConfigError("sample_ratio: must lie in (0, 1]");
    if (std::isnan(snr_db)) throw ConfigError("snr_db: must be a number or inf");
    if (structure.blocks() == 0) throw ConfigError("blocks: at least one block is required");
    if (!(angle_spread_deg >= 0.0)) throw ConfigError("angle_spread_deg: must be nonnegative");
    if (!(doppler_spread >= 0.0)) throw ConfigError("doppler_spread: must be nonnegative");
}

GenConfig csi_default_config() {
    GenConfig c;
    c.dims = {32, 16, 100};
    c.structure = BlockStructure(std::vector<std::size_t>(7, 3));
    c.sample_ratio = 0.05;
    c.snr_db = 25.0;
    c.scenario = Scenario::CsiLike;
    return c;
}

GroundTruth gen_btd_tensor(const GenConfig& config) {
    config.validate();
    auto rng = make_rng(config.seed, kFactors);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

    const BlockStructure& s = config.structure;
    const auto F = static_cast<Eigen::Index>(s.columns());
    const auto R = static_cast<Eigen::Index>(s.blocks());
    GroundTruth gt;
    gt.factors = {CMatrix(config.dims.I, F), CMatrix(config.dims.J, F), CMatrix(config.dims.K, R), s};
    for (Eigen::Index f = 0; f < F; ++f) fill_harmonic(gt.factors.B, f, std::polar(1.0, angle(rng)));
    for (Eigen::Index r = 0; r < R; ++r) fill_harmonic(gt.factors.C, r, std::polar(1.0, angle(rng)));
    for (Eigen::Index f = 0; f < F; ++f) {
        for (Eigen::Index i = 0; i < gt.factors.A.rows(); ++i) gt.factors.A(i, f) = complex_gaussian(rng);
    }
    gt.clean = reconstruct(gt.factors);
    gt.noisy = gt.clean;
    gt.mask = ObservationMask(config.dims, true);
    return gt;
}

GroundTruth gen_csi_like(const GenConfig& config) {
    config.validate();
    auto rng = make_rng(config.seed, kFactors);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto spread = [&](double half_width) { return half_width * (2.0 * unit(rng) - 1.0); };
    constexpr double deg = std::numbers::pi / 180.0;

    const BlockStructure& s = config.structure;
    const auto F = static_cast<Eigen::Index>(s.columns());
    GroundTruth gt;
    gt.factors = {CMatrix(config.dims.I, F), CMatrix(config.dims.J, F), CMatrix(config.dims.K, static_cast<Eigen::Index>(s.blocks())), s};
    ClusterGeometry& geo = gt.geometry;

    for (std::size_t r = 0; r < s.blocks(); ++r) {
        const double theta = -60.0 + 120.0 * unit(rng);
        const double doppler = unit(rng) - 0.5;
        const double delay = unit(rng);
        geo.cluster_angle_deg.push_back(theta);
        geo.cluster_doppler.push_back(doppler);
        geo.cluster_delay.push_back(delay);
        fill_harmonic(gt.factors.C, static_cast<Eigen::Index>(r), std::polar(1.0, -2.0 * std::numbers::pi * delay));

        for (std::size_t l = 0; l < s.size(r); ++l) {
            const auto f = static_cast<Eigen::Index>(s.col(r, l));
            const double path_theta = theta + spread(config.angle_spread_deg);
            const double path_doppler = doppler + spread(config.doppler_spread);
            geo.path_angle_deg.push_back(path_theta);
            geo.path_doppler.push_back(path_doppler);

            // Half-wavelength steering vector weighted by the path gain.
            const cplx gain = complex_gaussian(rng);
            fill_harmonic(gt.factors.A, f, std::polar(1.0, std::numbers::pi * std::sin(path_theta * deg)));
            gt.factors.A.col(f) *= gain;
            fill_harmonic(gt.factors.B, f, std::polar(1.0, 2.0 * std::numbers::pi * path_doppler));
        }
    }
    gt.clean = reconstruct(gt.factors);
    gt.noisy = gt.clean;
    gt.mask = ObservationMask(config.dims, true);
    return gt;
}

ComplexTensor3 add_noise(const ComplexTensor3& clean, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0.0) return clean;
    if (!std::isfinite(snr_db)) throw DomainError("add_noise: snr_db must be finite or +inf");
    auto rng = make_rng(seed, kNoise);
    ComplexTensor3 noise(clean.dims());
    for (std::size_t n = 0; n < noise.size(); ++n) noise[n] = complex_gaussian(rng);
    const double ratio = std::pow(10.0, -snr_db / 20.0); // sigma_n / sigma_s
    const double scale = ratio * clean.frobenius_norm() / noise.frobenius_norm();
    ComplexTensor3 out = clean;
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += scale * noise[n];
    return out;
}

ObservationMask gen_mask(const Dims& dims, double sample_ratio, std::uint64_t seed) {
    if (!(sample_ratio > 0.0 && sample_ratio <= 1.0)) throw ConfigError("sample_ratio: must lie in (0, 1]");
    const std::size_t total = dims.size();
    const auto count = static_cast<std::size_t>(std::llround(sample_ratio * static_cast<double>(total)));
    if (count == 0) throw ConfigError("sample_ratio: yields zero observed entries");
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto rng = make_rng(seed, kMask);
    // Partial Fisher-Yates: the first `count` slots are a uniform sample.
    for (std::size_t n = 0; n < count; ++n) {
        std::uniform_int_distribution<std::size_t> pick(n, total - 1);
        std::swap(idx[n], idx[pick(rng)]);
    }
    ObservationMask mask(dims, false);
    for (std::size_t n = 0; n < count; ++n) mask.set(idx[n], true);
    return mask;
}

GroundTruth generate(const GenConfig& config) {
    GroundTruth gt = config.scenario == Scenario::CsiLike ? gen_csi_like(config) : gen_btd_tensor(config);
    gt.noisy = add_noise(gt.clean, config.snr_db, config.seed);
    gt.mask = gen_mask(config.dims, config.sample_ratio, config.seed);
    return gt;
}

double rlne(const ComplexTensor3& estimate, const ComplexTensor3& clean) {
    if (!(estimate.dims() == clean.dims())) throw ShapeError("rlne: dimension mismatch");
    const double denom = clean.frobenius_norm();
    if (denom == 0.0) throw DomainError("rlne: reference tensor is zero");
    return std::min((estimate - clean).frobenius_norm() / denom, 1.0);
}

} // namespace hbtc
