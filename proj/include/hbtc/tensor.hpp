#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hbtc/errors.hpp"

namespace hbtc {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Mode sizes (I, J, K) of a third-order tensor.
struct Dims {
    std::size_t I = 0;
    std::size_t J = 0;
    std::size_t K = 0;

    [[nodiscard]] std::size_t size() const noexcept { return I * J * K; }
    friend bool operator==(const Dims&, const Dims&) = default;
};

/**
 * Dense third-order complex tensor.
 *
 * Entries are stored column-major in the first index: entry (i, j, k) lives at
 * offset i + I*(j + J*k). The accessors are 0-based; documentation elsewhere
 * uses the 1-based (i, j, k) convention of the model equations.
 */
class ComplexTensor3 {
public:
    ComplexTensor3() = default;
    explicit ComplexTensor3(Dims dims, cplx fill = {0.0, 0.0});
    ComplexTensor3(Dims dims, std::vector<cplx> entries);

    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return i + dims_.I * (j + dims_.J * k);
    }
    cplx& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept { return data_[offset(i, j, k)]; }
    const cplx& operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return data_[offset(i, j, k)];
    }
    cplx& operator[](std::size_t n) noexcept { return data_[n]; }
    const cplx& operator[](std::size_t n) const noexcept { return data_[n]; }

    [[nodiscard]] const std::vector<cplx>& entries() const noexcept { return data_; }

    [[nodiscard]] double frobenius_norm() const;
    [[nodiscard]] bool all_finite() const;

    ComplexTensor3& operator+=(const ComplexTensor3& other);
    ComplexTensor3& operator-=(const ComplexTensor3& other);
    ComplexTensor3& operator*=(cplx s);

private:
    Dims dims_{};
    std::vector<cplx> data_;
};

ComplexTensor3 operator+(ComplexTensor3 lhs, const ComplexTensor3& rhs);
ComplexTensor3 operator-(ComplexTensor3 lhs, const ComplexTensor3& rhs);
ComplexTensor3 operator*(cplx s, ComplexTensor3 t);

/// Binary indicator tensor of observed entries; same storage order as ComplexTensor3.
class ObservationMask {
public:
    ObservationMask() = default;
    explicit ObservationMask(Dims dims, bool fill = false);
    ObservationMask(Dims dims, std::vector<std::uint8_t> indicators);

    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t size() const noexcept { return flags_.size(); }
    [[nodiscard]] std::size_t observed_count() const noexcept { return count_; }
    /// Fraction of observed entries, observed_count / (I*J*K).
    [[nodiscard]] double sample_ratio() const noexcept;

    [[nodiscard]] bool observed(std::size_t n) const noexcept { return flags_[n] != 0; }
    [[nodiscard]] bool observed(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return flags_[i + dims_.I * (j + dims_.J * k)] != 0;
    }
    void set(std::size_t n, bool value);

    [[nodiscard]] const std::vector<std::uint8_t>& indicators() const noexcept { return flags_; }

    [[nodiscard]] ObservationMask complement() const;
    /// The mask as a 0/1 complex tensor.
    [[nodiscard]] ComplexTensor3 as_tensor() const;

private:
    Dims dims_{};
    std::vector<std::uint8_t> flags_;
    std::size_t count_ = 0;
};

/// Entrywise product. Throws ShapeError on mismatched dims.
ComplexTensor3 hadamard(const ComplexTensor3& p, const ComplexTensor3& q);

/// a ∘ b ∘ c, i.e. result(i,j,k) = a(i) b(j) c(k).
ComplexTensor3 outer_rank1(const CVector& a, const CVector& b, const CVector& c);

/// Sum of |y - t|^2 over observed entries.
double masked_sq_error(const ComplexTensor3& y, const ObservationMask& w, const ComplexTensor3& t_hat);

/// Observed entries of y with unobserved ones set to zero (W * Y).
ComplexTensor3 apply_mask(const ObservationMask& w, const ComplexTensor3& y);

} // namespace hbtc
