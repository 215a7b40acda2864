#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sadiv {

/// A symbol of GF(2^L); only the low L bits are meaningful.
using Element = std::uint16_t;

/// GF(2^L) for L in {8, 16} with log/antilog tables.
///
/// The constructor checks that x generates the multiplicative group modulo
/// `primitive_poly`, i.e. that the polynomial is primitive. Tables are built
/// once and never mutated, so a field may be shared freely across threads.
class GaloisField {
 public:
  GaloisField(unsigned l_bits, std::uint32_t primitive_poly);

  /// GF(256) with x^8 + x^4 + x^3 + x^2 + 1 (0x11D).
  static const GaloisField& gf256();
  /// GF(65536) with x^16 + x^12 + x^3 + x + 1 (0x1100B).
  static const GaloisField& gf65536();

  unsigned bits() const { return bits_; }
  std::uint32_t polynomial() const { return poly_; }
  /// Number of elements, 2^L.
  std::uint32_t size() const { return size_; }
  bool contains(std::uint32_t v) const { return v < size_; }

  static Element add(Element a, Element b) { return a ^ b; }
  static Element sub(Element a, Element b) { return a ^ b; }

  Element mul(Element a, Element b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }

  /// Throws DivisionByZeroError for a == 0.
  Element inv(Element a) const;
  Element div(Element a, Element b) const;
  /// alpha^i for the generator alpha = x.
  Element exp(std::uint32_t i) const { return exp_[i % (size_ - 1)]; }

  /// dst[i] += f * src[i]
  void axpy(std::span<Element> dst, Element f, std::span<const Element> src) const;
  /// v[i] *= f
  void scale(std::span<Element> v, Element f) const;

 private:
  unsigned bits_;
  std::uint32_t poly_;
  std::uint32_t size_;
  std::vector<Element> exp_;        // 2 * (size - 1) entries, no reduction in mul
  std::vector<std::uint32_t> log_;  // log_[0] unused
};

/// Dense row-major matrix over a GaloisField.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Element& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Element at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Element> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Element> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void swap_rows(std::size_t a, std::size_t b);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Element> data_;
};

Matrix multiply(const GaloisField& f, const Matrix& a, const Matrix& b);

struct EliminationResult {
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_columns;  // pivot_columns[i] is led by row i
  std::vector<std::size_t> free_columns;
  /// False if some zero row of the reduced matrix carries a nonzero rhs.
  bool consistent = true;
  Matrix reduced;
  Matrix reduced_rhs;
  /// Set when rank == cols and the system is consistent.
  std::optional<Matrix> solution;
};

/// Reduces [m | rhs] to reduced row-echelon form, pivoting on the first
/// nonzero entry of each column. Throws ShapeError if row counts differ.
EliminationResult gauss_jordan(const GaloisField& f, Matrix m, Matrix rhs);

}  // namespace sadiv
