#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "hbtc/btd.hpp"
#include "hbtc/tensor.hpp"

namespace hbtc {

enum class Scenario { Generic, CsiLike };

struct GenConfig {
    Dims dims{20, 20, 20};
    BlockStructure structure{std::vector<std::size_t>{3, 3, 3}};
    double snr_db = std::numeric_limits<double>::infinity();
    double sample_ratio = 0.15;
    std::uint64_t seed = 1;
    Scenario scenario = Scenario::Generic;

    // Channel-like scenario only.
    double angle_spread_deg = 5.0;   ///< half-width of the per-cluster angle spread
    double doppler_spread = 0.05;    ///< half-width of the per-cluster Doppler spread, cycles/sample

    void validate() const;
};

/// Defaults for the channel-like scenario: 32 x 16 x 100 with seven clusters of three paths.
GenConfig csi_default_config();

/// Per-path parameters drawn by the channel-like generator.
struct ClusterGeometry {
    std::vector<double> cluster_angle_deg; ///< per cluster
    std::vector<double> cluster_doppler;   ///< per cluster, cycles/sample
    std::vector<double> cluster_delay;     ///< per cluster, cycles/subcarrier
    std::vector<double> path_angle_deg;    ///< per column (block-major)
    std::vector<double> path_doppler;      ///< per column
};

struct GroundTruth {
    ComplexTensor3 clean;
    ComplexTensor3 noisy;
    ObservationMask mask;
    BtdFactors factors;
    ClusterGeometry geometry; ///< filled by the channel-like generator only
};

/// Random harmonic BTD: unit-circle generators for B and C, A ~ CN(0,1). Fills clean and factors.
GroundTruth gen_btd_tensor(const GenConfig& config);

/// Channel-like clustered tensor with the same block-harmonic structure.
GroundTruth gen_csi_like(const GenConfig& config);

/// clean + (sigma_n ||clean||)/(sigma_s ||N||) N with N ~ CN(0,1) entrywise; identity for infinite SNR.
ComplexTensor3 add_noise(const ComplexTensor3& clean, double snr_db, std::uint64_t seed);

/// Exactly round(ratio * I*J*K) observed entries, uniformly without replacement.
ObservationMask gen_mask(const Dims& dims, double sample_ratio, std::uint64_t seed);

/// Complete ground truth (factors, clean, noisy, mask) for the configured scenario.
GroundTruth generate(const GenConfig& config);

/// min(||estimate - clean||_F / ||clean||_F, 1).
double rlne(const ComplexTensor3& estimate, const ComplexTensor3& clean);

} // namespace hbtc
