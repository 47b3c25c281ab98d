#pragma once

#include <filesystem>
#include <iosfwd>

#include "hbtc/btd.hpp"
#include "hbtc/tensor.hpp"

namespace hbtc::io {

// Binary layouts (all integers u64 little-endian, all reals IEEE-754 f64 little-endian):
//
//   CT3   "CT3\0" | I J K | I*J*K x (re, im), first index fastest
//   CM3   "CM3\0" | I J K | I*J*K x u8 in {0, 1}, same order
//   BTD1  "BTD1"  | I J K R | L_1..L_R | A (I x F) | B (J x F) | C (K x R)
//         matrices column-major, entries encoded as in CT3.
//
// Readers throw FormatError on bad magic, truncation or trailing bytes.

void write_tensor(std::ostream& out, const ComplexTensor3& t);
ComplexTensor3 read_tensor(std::istream& in);

void write_mask(std::ostream& out, const ObservationMask& w);
ObservationMask read_mask(std::istream& in);

void write_factors(std::ostream& out, const BtdFactors& f);
BtdFactors read_factors(std::istream& in);

void save_tensor(const std::filesystem::path& p, const ComplexTensor3& t);
ComplexTensor3 load_tensor(const std::filesystem::path& p);
void save_mask(const std::filesystem::path& p, const ObservationMask& w);
ObservationMask load_mask(const std::filesystem::path& p);
void save_factors(const std::filesystem::path& p, const BtdFactors& f);
BtdFactors load_factors(const std::filesystem::path& p);

} // namespace hbtc::io
