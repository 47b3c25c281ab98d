#include "hbtc/tensor.hpp"

#include <cmath>
#include <string>

namespace hbtc {

namespace {

std::string dims_str(const Dims& d) {
    return std::to_string(d.I) + "x" + std::to_string(d.J) + "x" + std::to_string(d.K);
}

void require_same(const Dims& a, const Dims& b, const char* what) {
    if (!(a == b)) {
        throw ShapeError(std::string(what) + ": dimension mismatch " + dims_str(a) + " vs " + dims_str(b));
    }
}

} // namespace

ComplexTensor3::ComplexTensor3(Dims dims, cplx fill) : dims_(dims), data_(dims.size(), fill) {}

ComplexTensor3::ComplexTensor3(Dims dims, std::vector<cplx> entries) : dims_(dims), data_(std::move(entries)) {
    if (data_.size() != dims_.size()) {
        throw ShapeError("ComplexTensor3: entry count " + std::to_string(data_.size()) + " does not match " +
                         dims_str(dims_));
    }
}

double ComplexTensor3::frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

bool ComplexTensor3::all_finite() const {
    for (const auto& v : data_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
}

ComplexTensor3& ComplexTensor3::operator+=(const ComplexTensor3& other) {
    require_same(dims_, other.dims_, "operator+=");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += other.data_[n];
    return *this;
}

ComplexTensor3& ComplexTensor3::operator-=(const ComplexTensor3& other) {
    require_same(dims_, other.dims_, "operator-=");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= other.data_[n];
    return *this;
}

ComplexTensor3& ComplexTensor3::operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
}

ComplexTensor3 operator+(ComplexTensor3 lhs, const ComplexTensor3& rhs) { return lhs += rhs; }
ComplexTensor3 operator-(ComplexTensor3 lhs, const ComplexTensor3& rhs) { return lhs -= rhs; }
ComplexTensor3 operator*(cplx s, ComplexTensor3 t) { return t *= s; }

ObservationMask::ObservationMask(Dims dims, bool fill)
    : dims_(dims), flags_(dims.size(), fill ? 1 : 0), count_(fill ? dims.size() : 0) {}

ObservationMask::ObservationMask(Dims dims, std::vector<std::uint8_t> indicators)
    : dims_(dims), flags_(std::move(indicators)) {
    if (flags_.size() != dims_.size()) {
        throw ShapeError("ObservationMask: indicator count " + std::to_string(flags_.size()) +
                         " does not match " + dims_str(dims_));
    }
    for (auto& f : flags_) {
        if (f > 1) throw FormatError("ObservationMask: indicator values must be 0 or 1");
        count_ += f;
    }
}

double ObservationMask::sample_ratio() const noexcept {
    return flags_.empty() ? 0.0 : static_cast<double>(count_) / static_cast<double>(flags_.size());
}

void ObservationMask::set(std::size_t n, bool value) {
    const std::uint8_t v = value ? 1 : 0;
    if (flags_[n] == v) return;
    flags_[n] = v;
    if (value) {
        ++count_;
    } else {
        --count_;
    }
}

ObservationMask ObservationMask::complement() const {
    std::vector<std::uint8_t> f(flags_.size());
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = flags_[n] ? 0 : 1;
    return ObservationMask(dims_, std::move(f));
}

ComplexTensor3 ObservationMask::as_tensor() const {
    ComplexTensor3 t(dims_);
    for (std::size_t n = 0; n < flags_.size(); ++n) t[n] = flags_[n] ? 1.0 : 0.0;
    return t;
}

ComplexTensor3 hadamard(const ComplexTensor3& p, const ComplexTensor3& q) {
    require_same(p.dims(), q.dims(), "hadamard");
    ComplexTensor3 out(p.dims());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = p[n] * q[n];
    return out;
}

ComplexTensor3 outer_rank1(const CVector& a, const CVector& b, const CVector& c) {
    if (a.size() == 0 || b.size() == 0 || c.size() == 0) {
        throw ShapeError("outer_rank1: vectors must be nonempty");
    }
    const Dims d{static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()),
                 static_cast<std::size_t>(c.size())};
    ComplexTensor3 out(d);
    for (std::size_t k = 0; k < d.K; ++k) {
        for (std::size_t j = 0; j < d.J; ++j) {
            const cplx bc = b(j) * c(k);
            for (std::size_t i = 0; i < d.I; ++i) out(i, j, k) = a(i) * bc;
        }
    }
    return out;
}

double masked_sq_error(const ComplexTensor3& y, const ObservationMask& w, const ComplexTensor3& t_hat) {
    require_same(y.dims(), w.dims(), "masked_sq_error");
    require_same(y.dims(), t_hat.dims(), "masked_sq_error");
    double s = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
        if (w.observed(n)) s += std::norm(y[n] - t_hat[n]);
    }
    return s;
}

ComplexTensor3 apply_mask(const ObservationMask& w, const ComplexTensor3& y) {
    require_same(y.dims(), w.dims(), "apply_mask");
    ComplexTensor3 out(y.dims());
    for (std::size_t n = 0; n < y.size(); ++n) {
        if (w.observed(n)) out[n] = y[n];
    }
    return out;
}

} // namespace hbtc
