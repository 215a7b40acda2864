#include "sadiv/galois.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <stdexcept>

#include <fmt/core.h>

#include "sadiv/errors.hpp"

namespace sadiv {

GaloisField::GaloisField(unsigned l_bits, std::uint32_t primitive_poly)
    : bits_(l_bits), poly_(primitive_poly) {
  if (l_bits != 8 && l_bits != 16)
    throw std::invalid_argument(fmt::format("unsupported symbol width L = {}", l_bits));
  size_ = std::uint32_t{1} << l_bits;
  if (std::bit_width(primitive_poly) != l_bits + 1)
    throw std::invalid_argument(
        fmt::format("polynomial {:#x} does not have degree {}", primitive_poly, l_bits));

  const std::uint32_t group = size_ - 1;
  exp_.resize(2 * group);
  log_.assign(size_, 0);
  std::vector<bool> seen(size_, false);
  std::uint32_t x = 1;
  for (std::uint32_t i = 0; i < group; ++i) {
    if (seen[x])
      throw std::invalid_argument(fmt::format(
          "polynomial {:#x} is not primitive: x has order {} < {}", primitive_poly, i, group));
    seen[x] = true;
    exp_[i] = static_cast<Element>(x);
    log_[x] = i;
    x <<= 1;
    if (x & size_) x ^= primitive_poly;
  }
  if (x != 1)
    throw std::invalid_argument(
        fmt::format("polynomial {:#x} is not primitive", primitive_poly));
  for (std::uint32_t i = group; i < 2 * group; ++i) exp_[i] = exp_[i - group];
}

const GaloisField& GaloisField::gf256() {
  static const GaloisField f(8, 0x11D);
  return f;
}

const GaloisField& GaloisField::gf65536() {
  static const GaloisField f(16, 0x1100B);
  return f;
}

Element GaloisField::inv(Element a) const {
  if (a == 0) throw DivisionByZeroError("inverse of zero in GF(2^L)");
  return exp_[(size_ - 1 - log_[a]) % (size_ - 1)];
}

Element GaloisField::div(Element a, Element b) const {
  if (b == 0) throw DivisionByZeroError("division by zero in GF(2^L)");
  if (a == 0) return 0;
  return exp_[log_[a] + (size_ - 1) - log_[b]];
}

void GaloisField::axpy(std::span<Element> dst, Element f, std::span<const Element> src) const {
  if (f == 0) return;
  const std::size_t n = std::min(dst.size(), src.size());
  if (bits_ == 8 && n >= 64) {
    std::array<Element, 256> prod;
    prod[0] = 0;
    const std::uint32_t lf = log_[f];
    for (std::uint32_t v = 1; v < 256; ++v) prod[v] = exp_[lf + log_[v]];
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= prod[src[i]];
    return;
  }
  const std::uint32_t lf = log_[f];
  for (std::size_t i = 0; i < n; ++i) {
    if (src[i] != 0) dst[i] ^= exp_[lf + log_[src[i]]];
  }
}

void GaloisField::scale(std::span<Element> v, Element f) const {
  for (Element& x : v) x = mul(x, f);
}

// ---------------------------------------------------------------------------

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

void Matrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  std::swap_ranges(data_.begin() + a * cols_, data_.begin() + (a + 1) * cols_,
                   data_.begin() + b * cols_);
}

Matrix multiply(const GaloisField& f, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError(fmt::format("cannot multiply {}x{} by {}x{}", a.rows(), a.cols(), b.rows(),
                                 b.cols()));
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) f.axpy(c.row(i), a.at(i, k), b.row(k));
  return c;
}

EliminationResult gauss_jordan(const GaloisField& f, Matrix m, Matrix rhs) {
  if (m.rows() != rhs.rows())
    throw ShapeError(fmt::format("matrix has {} rows but right-hand side has {}", m.rows(),
                                 rhs.rows()));
  EliminationResult res;
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::size_t r = 0;

  for (std::size_t c = 0; c < cols; ++c) {
    if (r == rows) {
      res.free_columns.push_back(c);
      continue;
    }
    std::size_t p = r;
    while (p < rows && m.at(p, c) == 0) ++p;
    if (p == rows) {
      res.free_columns.push_back(c);
      continue;
    }
    m.swap_rows(p, r);
    rhs.swap_rows(p, r);

    const Element inv = f.inv(m.at(r, c));
    // Row r is zero left of c: every row at or below the current pivot is.
    f.scale(m.row(r).subspan(c), inv);
    f.scale(rhs.row(r), inv);

    const auto pivot_tail = std::span<const Element>(m.row(r)).subspan(c);
    const auto pivot_rhs = std::span<const Element>(rhs.row(r));
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      const Element factor = m.at(i, c);
      if (factor == 0) continue;
      f.axpy(m.row(i).subspan(c), factor, pivot_tail);
      f.axpy(rhs.row(i), factor, pivot_rhs);
    }
    res.pivot_columns.push_back(c);
    ++r;
  }
  res.rank = r;

  for (std::size_t i = r; i < rows && res.consistent; ++i) {
    for (Element v : rhs.row(i)) {
      if (v != 0) {
        res.consistent = false;
        break;
      }
    }
  }

  if (res.rank == cols && res.consistent) {
    Matrix sol(cols, rhs.cols());
    for (std::size_t i = 0; i < cols; ++i)
      std::copy(rhs.row(i).begin(), rhs.row(i).end(), sol.row(i).begin());
    res.solution = std::move(sol);
  }
  res.reduced = std::move(m);
  res.reduced_rhs = std::move(rhs);
  return res;
}

}  // namespace sadiv
