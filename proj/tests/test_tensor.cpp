#include <doctest.h>

#include <random>

#include "hbtc/tensor.hpp"
#include "test_util.hpp"

using namespace hbtc;
using hbtc::testing::rand_complex;
using hbtc::testing::rand_tensor;
using hbtc::testing::rand_vector;

TEST_CASE("hadamard") {
    std::mt19937_64 rng(7);
    const Dims d{3, 3, 3};

    SUBCASE("ones is the identity") {
        const ComplexTensor3 q = rand_tensor(rng, d);
        const ComplexTensor3 out = hadamard(ComplexTensor3(d, 1.0), q);
        for (std::size_t n = 0; n < q.size(); ++n) CHECK(out[n] == q[n]);
    }
    SUBCASE("twos squared") {
        const ComplexTensor3 two({2, 2, 2}, 2.0);
        const ComplexTensor3 out = hadamard(two, two);
        for (std::size_t n = 0; n < out.size(); ++n) CHECK(out[n] == cplx(4.0, 0.0));
    }
    SUBCASE("matches scalar loop") {
        const ComplexTensor3 p = rand_tensor(rng, d);
        const ComplexTensor3 q = rand_tensor(rng, d);
        const ComplexTensor3 out = hadamard(p, q);
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(out(i, j, k) - p(i, j, k) * q(i, j, k)) == 0.0);
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(hadamard(ComplexTensor3({2, 2, 2}), ComplexTensor3({2, 2, 3})), ShapeError);
    }
}

TEST_CASE("outer_rank1") {
    std::mt19937_64 rng(11);
    SUBCASE("ones") {
        const CVector one = CVector::Ones(3);
        const ComplexTensor3 t = outer_rank1(one, one, one);
        for (std::size_t n = 0; n < t.size(); ++n) CHECK(t[n] == cplx(1.0, 0.0));
    }
    SUBCASE("unit vectors") {
        const CVector e1 = CVector::Unit(3, 0);
        const ComplexTensor3 t = outer_rank1(e1, e1, e1);
        CHECK(t(0, 0, 0) == cplx(1.0, 0.0));
        CHECK(t.frobenius_norm() == doctest::Approx(1.0));
    }
    SUBCASE("triple loop and multilinearity") {
        const CVector a = rand_vector(rng, 3), b = rand_vector(rng, 4), c = rand_vector(rng, 2);
        const ComplexTensor3 t = outer_rank1(a, b, c);
        CHECK(t.dims() == Dims{3, 4, 2});
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t j = 0; j < 4; ++j)
                for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(t(i, j, k) - a(i) * b(j) * c(k)) < 1e-15);
        const cplx alpha = rand_complex(rng);
        const ComplexTensor3 scaled = outer_rank1(a, alpha * b, c);
        CHECK((scaled - alpha * t).frobenius_norm() <= 1e-14 * t.frobenius_norm());
    }
    SUBCASE("empty vector rejected") {
        CHECK_THROWS_AS(outer_rank1(CVector(0), CVector::Ones(2), CVector::Ones(2)), ShapeError);
    }
}

TEST_CASE("masked_sq_error") {
    std::mt19937_64 rng(3);
    const Dims d{2, 2, 2};
    const ComplexTensor3 y = rand_tensor(rng, d);
    const ComplexTensor3 t = rand_tensor(rng, d);
    const ObservationMask w = hbtc::testing::rand_mask(rng, d, 0.5);

    CHECK(masked_sq_error(y, w, y) == 0.0);
    CHECK(masked_sq_error(y, ObservationMask(d, false), t) == 0.0);

    double expect = 0.0;
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 2; ++i)
                if (w.observed(i, j, k)) expect += std::norm(y(i, j, k) - t(i, j, k));
    CHECK(masked_sq_error(y, w, t) == doctest::Approx(expect).epsilon(1e-14));
    CHECK_THROWS_AS(masked_sq_error(y, ObservationMask({2, 2, 3}), t), ShapeError);
}

TEST_CASE("mask split is Pythagorean") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const Dims d{4, 3, 5};
        const ComplexTensor3 t = rand_tensor(rng, d);
        const ObservationMask w = hbtc::testing::rand_mask(rng, d, 0.3);
        CHECK(w.observed_count() + w.complement().observed_count() == d.size());
        const double in = hadamard(w.as_tensor(), t).frobenius_norm();
        const double out = hadamard(w.complement().as_tensor(), t).frobenius_norm();
        const double total = t.frobenius_norm();
        CHECK(std::abs(in * in + out * out - total * total) <= 1e-12 * total * total);
    }
}

TEST_CASE("storage order is first-index fastest") {
    ComplexTensor3 t({2, 3, 4});
    t(1, 0, 0) = 1.0;
    t(0, 1, 0) = 2.0;
    t(0, 0, 1) = 3.0;
    CHECK(t[1] == cplx(1.0));
    CHECK(t[2] == cplx(2.0));
    CHECK(t[6] == cplx(3.0));
}

TEST_CASE("mask bookkeeping") {
    ObservationMask w({2, 2, 2}, false);
    w.set(3, true);
    w.set(3, true);
    w.set(5, true);
    CHECK(w.observed_count() == 2);
    CHECK(w.sample_ratio() == doctest::Approx(0.25));
    w.set(3, false);
    CHECK(w.observed_count() == 1);
    CHECK_THROWS_AS(ObservationMask({2, 2, 2}, std::vector<std::uint8_t>(7, 0)), ShapeError);
}
