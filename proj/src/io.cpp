#include "hbtc/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace hbtc::io {

namespace {

constexpr std::array<char, 4> kTensorMagic{'C', 'T', '3', '\0'};
constexpr std::array<char, 4> kMaskMagic{'C', 'M', '3', '\0'};
constexpr std::array<char, 4> kFactorMagic{'B', 'T', 'D', '1'};
// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 32;

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int n = 0; n < 8; ++n) b[n] = static_cast<char>((v >> (8 * n)) & 0xffu);
    out.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& in, const char* what) {
    std::array<unsigned char, 8> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw FormatError(std::string(what) + ": truncated header");
    std::uint64_t v = 0;
    for (int n = 7; n >= 0; --n) v = (v << 8) | b[n];
    return v;
}

void put_f64(std::ostream& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

double get_f64(std::istream& in, const char* what) {
    std::array<unsigned char, 8> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw FormatError(std::string(what) + ": truncated data");
    std::uint64_t v = 0;
    for (int n = 7; n >= 0; --n) v = (v << 8) | b[n];
    return std::bit_cast<double>(v);
}

void put_complex(std::ostream& out, cplx v) {
    put_f64(out, v.real());
    put_f64(out, v.imag());
}

cplx get_complex(std::istream& in, const char* what) {
    const double re = get_f64(in, what);
    const double im = get_f64(in, what);
    return {re, im};
}

void expect_magic(std::istream& in, const std::array<char, 4>& magic, const char* what) {
    std::array<char, 4> got{};
    if (!in.read(got.data(), 4) || got != magic) throw FormatError(std::string(what) + ": bad magic bytes");
}

void expect_eof(std::istream& in, const char* what) {
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError(std::string(what) + ": trailing bytes");
}

Dims get_dims(std::istream& in, const char* what) {
    const std::uint64_t I = get_u64(in, what);
    const std::uint64_t J = get_u64(in, what);
    const std::uint64_t K = get_u64(in, what);
    if (I == 0 || J == 0 || K == 0) throw FormatError(std::string(what) + ": zero dimension");
    if (I > kMaxEntries / J || I * J > kMaxEntries / K) throw FormatError(std::string(what) + ": dimensions too large");
    return {I, J, K};
}

void put_dims(std::ostream& out, const Dims& d) {
    put_u64(out, d.I);
    put_u64(out, d.J);
    put_u64(out, d.K);
}

void put_matrix(std::ostream& out, const CMatrix& m) {
    for (Eigen::Index n = 0; n < m.size(); ++n) put_complex(out, m.data()[n]);
}

CMatrix get_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index n = 0; n < m.size(); ++n) m.data()[n] = get_complex(in, "BTD1");
    return m;
}

template <typename T, typename Reader>
T load(const std::filesystem::path& p, Reader reader) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw FormatError("cannot open " + p.string());
    return reader(in);
}

template <typename T, typename Writer>
void save(const std::filesystem::path& p, const T& v, Writer writer) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw FormatError("cannot write " + p.string());
    writer(out, v);
    if (!out) throw FormatError("write failed: " + p.string());
}

} // namespace

void write_tensor(std::ostream& out, const ComplexTensor3& t) {
    out.write(kTensorMagic.data(), 4);
    put_dims(out, t.dims());
    for (const auto& v : t.entries()) put_complex(out, v);
}

ComplexTensor3 read_tensor(std::istream& in) {
    expect_magic(in, kTensorMagic, "CT3");
    const Dims d = get_dims(in, "CT3");
    std::vector<cplx> data(d.size());
    for (auto& v : data) v = get_complex(in, "CT3");
    expect_eof(in, "CT3");
    return ComplexTensor3(d, std::move(data));
}

void write_mask(std::ostream& out, const ObservationMask& w) {
    out.write(kMaskMagic.data(), 4);
    put_dims(out, w.dims());
    out.write(reinterpret_cast<const char*>(w.indicators().data()), static_cast<std::streamsize>(w.size()));
}

ObservationMask read_mask(std::istream& in) {
    expect_magic(in, kMaskMagic, "CM3");
    const Dims d = get_dims(in, "CM3");
    std::vector<std::uint8_t> flags(d.size());
    if (!in.read(reinterpret_cast<char*>(flags.data()), static_cast<std::streamsize>(flags.size()))) {
        throw FormatError("CM3: truncated data");
    }
    expect_eof(in, "CM3");
    for (auto f : flags) {
        if (f > 1) throw FormatError("CM3: indicator byte other than 0 or 1");
    }
    return ObservationMask(d, std::move(flags));
}

void write_factors(std::ostream& out, const BtdFactors& f) {
    f.validate();
    out.write(kFactorMagic.data(), 4);
    put_dims(out, f.dims());
    put_u64(out, f.structure.blocks());
    for (auto l : f.structure.sizes()) put_u64(out, l);
    put_matrix(out, f.A);
    put_matrix(out, f.B);
    put_matrix(out, f.C);
}

BtdFactors read_factors(std::istream& in) {
    expect_magic(in, kFactorMagic, "BTD1");
    const Dims d = get_dims(in, "BTD1");
    const std::uint64_t R = get_u64(in, "BTD1");
    if (R == 0 || R > kMaxEntries / d.K) throw FormatError("BTD1: invalid block count");
    std::vector<std::size_t> sizes(R);
    std::uint64_t F = 0;
    for (auto& l : sizes) {
        l = get_u64(in, "BTD1");
        if (l == 0 || l > kMaxEntries) throw FormatError("BTD1: invalid block size");
        F += l;
    }
    if (F > kMaxEntries / std::max(d.I, d.J)) throw FormatError("BTD1: factor matrices too large");
    BtdFactors out;
    out.structure = BlockStructure(std::move(sizes));
    out.A = get_matrix(in, d.I, F);
    out.B = get_matrix(in, d.J, F);
    out.C = get_matrix(in, d.K, R);
    expect_eof(in, "BTD1");
    return out;
}

void save_tensor(const std::filesystem::path& p, const ComplexTensor3& t) { save(p, t, write_tensor); }
ComplexTensor3 load_tensor(const std::filesystem::path& p) { return load<ComplexTensor3>(p, read_tensor); }
void save_mask(const std::filesystem::path& p, const ObservationMask& w) { save(p, w, write_mask); }
ObservationMask load_mask(const std::filesystem::path& p) { return load<ObservationMask>(p, read_mask); }
void save_factors(const std::filesystem::path& p, const BtdFactors& f) { save(p, f, write_factors); }
BtdFactors load_factors(const std::filesystem::path& p) { return load<BtdFactors>(p, read_factors); }

} // namespace hbtc::io
