#include <doctest.h>

#include <random>
#include <sstream>

#include "hbtc/config.hpp"
#include "hbtc/io.hpp"
#include "test_util.hpp"

using namespace hbtc;
using namespace hbtc::testing;

TEST_CASE("binary round trips") {
    std::mt19937_64 rng(61);
    for (int rep = 0; rep < 20; ++rep) {
        std::uniform_int_distribution<std::size_t> dim(1, 6);
        const Dims d{dim(rng), dim(rng) + 1, dim(rng) + 1};

        const ComplexTensor3 t = rand_tensor(rng, d);
        std::stringstream st;
        io::write_tensor(st, t);
        CHECK(st.str().size() == 4 + 24 + 16 * d.size());
        CHECK(identical(io::read_tensor(st), t));

        const ObservationMask w = rand_mask(rng, d, 0.5);
        std::stringstream sm;
        io::write_mask(sm, w);
        const ObservationMask w2 = io::read_mask(sm);
        CHECK(w2.observed_count() == w.observed_count());
        for (std::size_t n = 0; n < w.size(); ++n) CHECK(w2.observed(n) == w.observed(n));

        const BtdFactors f = rand_factors(rng, d, rand_structure(rng, 3, 3));
        std::stringstream sf;
        io::write_factors(sf, f);
        const BtdFactors f2 = io::read_factors(sf);
        CHECK(f2.structure == f.structure);
        CHECK(f2.A == f.A);
        CHECK(f2.B == f.B);
        CHECK(f2.C == f.C);
    }
}

TEST_CASE("little-endian header") {
    std::stringstream s;
    io::write_tensor(s, ComplexTensor3({2, 3, 4}));
    const std::string bytes = s.str();
    CHECK(bytes.substr(0, 4) == std::string("CT3\0", 4));
    CHECK(bytes[4] == 2);
    CHECK(bytes[12] == 3);
    CHECK(bytes[20] == 4);
    CHECK(bytes[5] == 0);
}

TEST_CASE("malformed files") {
    std::stringstream good;
    io::write_tensor(good, ComplexTensor3({2, 2, 2}, cplx(1.0, 2.0)));
    const std::string bytes = good.str();

    std::istringstream bad_magic("XT3" + bytes.substr(3));
    CHECK_THROWS_AS(io::read_tensor(bad_magic), FormatError);
    std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(io::read_tensor(truncated), FormatError);
    std::istringstream trailing(bytes + "x");
    CHECK_THROWS_AS(io::read_tensor(trailing), FormatError);
    std::istringstream wrong_kind(bytes);
    CHECK_THROWS_AS(io::read_mask(wrong_kind), FormatError);

    std::stringstream m;
    io::write_mask(m, ObservationMask({1, 1, 2}, true));
    std::string mb = m.str();
    mb.back() = 7;
    std::istringstream bad_flag(mb);
    CHECK_THROWS_AS(io::read_mask(bad_flag), FormatError);
    CHECK_THROWS_AS(io::load_tensor("/nonexistent/file.ct3"), FormatError);
}

TEST_CASE("key-value parsing") {
    const auto kv = KeyValueConfig::parse("# header\n  Dims = 8, 9,10  \nblocks=2,1\nsnr_db = inf # clean\n\n"
                                          "backend = GN\nlambda=0.5\ndata_consistency = true\n");
    const GenConfig g = gen_config_from(kv);
    CHECK(g.dims == Dims{8, 9, 10});
    CHECK(g.structure == BlockStructure({2, 1}));
    CHECK(std::isinf(g.snr_db));
    const SolverConfig s = solver_config_from(kv);
    CHECK(s.backend == Backend::GN);
    CHECK(s.lambda == 0.5);
    CHECK(s.data_consistency);
    CHECK(solver_config_from(KeyValueConfig::parse("init = spectral")).init == InitMode::Spectral);
    CHECK(solver_config_from(KeyValueConfig::parse("svt_threshold = inv_beta")).svt_threshold ==
          SvtThreshold::InverseBeta);

    const GenConfig csi = gen_config_from(KeyValueConfig::parse("scenario = csi_like"));
    CHECK(csi.dims == Dims{32, 16, 100});
    CHECK(csi.structure.columns() == 21);
}

TEST_CASE("configuration errors name the field") {
    CHECK_THROWS_WITH_AS(KeyValueConfig::parse("lamda = 1"), doctest::Contains("lamda"), ConfigError);
    CHECK_THROWS_WITH_AS(KeyValueConfig::parse("seed = 1\nseed = 2"), doctest::Contains("seed"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign"), ConfigError);
    CHECK_THROWS_WITH_AS(solver_config_from(KeyValueConfig::parse("lambda = abc")), doctest::Contains("lambda"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(solver_config_from(KeyValueConfig::parse("rho_penalty = 1.5")),
                         doctest::Contains("rho_penalty"), ConfigError);
    CHECK_THROWS_WITH_AS(gen_config_from(KeyValueConfig::parse("sample_ratio = 0")), doctest::Contains("sample_ratio"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(gen_config_from(KeyValueConfig::parse("dims = 4,4")), doctest::Contains("dims"), ConfigError);
    CHECK_THROWS_WITH_AS(solver_config_from(KeyValueConfig::parse("backend = sgd")), doctest::Contains("backend"),
                         ConfigError);
    CHECK_THROWS_AS(parse_double("1.5x", "snr_db"), ConfigError);
    CHECK(parse_double("-inf", "snr_db") < 0.0);
}
