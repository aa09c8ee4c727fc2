#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "mipt/errors.hpp"

namespace mipt::gf2 {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

// Dense bit matrix, rows packed into 64-bit words.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(words_for(cols)), data_(rows * words_for(cols), 0) {}

  static BitMatrix identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  // Rows given as strings of '0'/'1'.
  static BitMatrix from_rows(const std::vector<std::string>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    BitMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols) throw DomainError("ragged bit matrix rows");
      for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rows[r][c] == '1');
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t stride() const { return stride_; }

  bool get(std::size_t r, std::size_t c) const { return (data_[r * stride_ + c / kWordBits] >> (c % kWordBits)) & 1U; }
  void set(std::size_t r, std::size_t c, bool v) {
    Word& w = data_[r * stride_ + c / kWordBits];
    const Word bit = Word{1} << (c % kWordBits);
    w = v ? (w | bit) : (w & ~bit);
  }

  Word* row(std::size_t r) { return data_.data() + r * stride_; }
  const Word* row(std::size_t r) const { return data_.data() + r * stride_; }

  void xor_row_into(std::size_t src, std::size_t dst) {
    Word* d = row(dst);
    const Word* s = row(src);
    for (std::size_t w = 0; w < stride_; ++w) d[w] ^= s[w];
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t w = 0; w < stride_; ++w) std::swap(data_[a * stride_ + w], data_[b * stride_ + w]);
  }

  bool is_zero() const {
    for (Word w : data_) {
      if (w) return false;
    }
    return true;
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<Word> data_;
};

// Row-reduces `m` in place; returns the rank.
inline std::size_t eliminate(BitMatrix& m) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    const std::size_t word = c / kWordBits;
    const Word bit = Word{1} << (c % kWordBits);
    std::size_t pivot = rank;
    while (pivot < m.rows() && !(m.row(pivot)[word] & bit)) ++pivot;
    if (pivot == m.rows()) continue;
    m.swap_rows(pivot, rank);
    for (std::size_t r = rank + 1; r < m.rows(); ++r) {
      if (m.row(r)[word] & bit) m.xor_row_into(rank, r);
    }
    ++rank;
  }
  return rank;
}

inline std::size_t rank(BitMatrix m) { return eliminate(m); }

inline std::size_t nullity_left(const BitMatrix& m) { return m.rows() - rank(m); }

}  // namespace mipt::gf2
