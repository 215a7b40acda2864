#include <doctest.h>

#include <stdexcept>

#include "sadiv/errors.hpp"
#include "sadiv/galois.hpp"
#include "sadiv/random.hpp"
#include "support/oracles.hpp"

using namespace sadiv;

namespace {

Matrix random_matrix(const GaloisField& f, std::size_t r, std::size_t c, RandomStream& rng,
                     double density = 1.0) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (rng.bernoulli(density)) m.at(i, j) = static_cast<Element>(rng.uniform_below(f.size()));
  return m;
}

std::vector<std::vector<std::uint32_t>> to_rows(const Matrix& m) {
  std::vector<std::vector<std::uint32_t>> rows(m.rows(), std::vector<std::uint32_t>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m.at(i, j);
  return rows;
}

Matrix matvec(const GaloisField& f, const Matrix& m, const Matrix& x) { return multiply(f, m, x); }

}  // namespace

TEST_CASE("GF(256) tables") {
  const auto& f = GaloisField::gf256();
  CHECK(f.bits() == 8);
  CHECK(f.size() == 256);
  CHECK(f.mul(0x80, 0x02) == 0x1D);
  CHECK(f.mul(0x02, 0x8E) == 0x01);

  SUBCASE("every product matches shift-and-reduce") {
    for (std::uint32_t a = 0; a < 256; ++a)
      for (std::uint32_t b = 0; b < 256; ++b)
        REQUIRE(f.mul(static_cast<Element>(a), static_cast<Element>(b)) ==
                oracle::shift_and_reduce_mul(a, b, 0x11D, 8));
  }
  SUBCASE("every nonzero element has an inverse") {
    for (std::uint32_t a = 1; a < 256; ++a) {
      const auto e = static_cast<Element>(a);
      REQUIRE(f.mul(e, f.inv(e)) == 1);
      REQUIRE(f.inv(f.inv(e)) == e);
    }
    CHECK_THROWS_AS(f.inv(0), DivisionByZeroError);
    CHECK_THROWS_AS(f.div(3, 0), DivisionByZeroError);
  }
  SUBCASE("x generates the multiplicative group") {
    std::vector<bool> seen(256, false);
    for (std::uint32_t i = 0; i < 255; ++i) {
      const auto v = f.exp(i);
      REQUIRE(v != 0);
      REQUIRE(!seen[v]);
      seen[v] = true;
    }
    CHECK(f.exp(255) == 1);
  }
  SUBCASE("field axioms, exhaustive over pairs and sampled triples") {
    for (std::uint32_t a = 0; a < 256; ++a)
      for (std::uint32_t b = 0; b < 256; ++b) {
        const auto x = static_cast<Element>(a), y = static_cast<Element>(b);
        REQUIRE(f.mul(x, y) == f.mul(y, x));
        REQUIRE(GaloisField::add(x, y) == GaloisField::add(y, x));
        REQUIRE(GaloisField::sub(GaloisField::add(x, y), y) == x);
        if (y != 0) REQUIRE(f.mul(f.div(x, y), y) == x);
      }
    for (std::uint32_t a = 0; a < 256; ++a) {
      CHECK(f.mul(static_cast<Element>(a), 1) == a);
      CHECK(f.mul(static_cast<Element>(a), 0) == 0);
      CHECK(GaloisField::add(static_cast<Element>(a), 0) == a);
    }
    auto rng = RandomStream::derive(99, 0);
    for (int i = 0; i < 100000; ++i) {
      const auto a = static_cast<Element>(rng.uniform_below(256));
      const auto b = static_cast<Element>(rng.uniform_below(256));
      const auto c = static_cast<Element>(rng.uniform_below(256));
      REQUIRE(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)));
      REQUIRE(f.mul(a, GaloisField::add(b, c)) == GaloisField::add(f.mul(a, b), f.mul(a, c)));
    }
  }
}

TEST_CASE("GF(65536)") {
  const auto& f = GaloisField::gf65536();
  CHECK(f.bits() == 16);
  CHECK(f.size() == 65536);
  auto rng = RandomStream::derive(5, 5);
  for (int i = 0; i < 100000; ++i) {
    const auto a = static_cast<std::uint32_t>(rng.uniform_below(65536));
    const auto b = static_cast<std::uint32_t>(rng.uniform_below(65536));
    REQUIRE(f.mul(static_cast<Element>(a), static_cast<Element>(b)) ==
            oracle::shift_and_reduce_mul(a, b, 0x1100B, 16));
  }
  for (std::uint32_t a = 1; a < 65536; ++a) REQUIRE(f.mul(static_cast<Element>(a), f.inv(static_cast<Element>(a))) == 1);
}

TEST_CASE("field construction") {
  CHECK_NOTHROW(GaloisField(8, 0x11D));
  CHECK_NOTHROW(GaloisField(8, 0x12B));
  CHECK_THROWS_AS(GaloisField(8, 0x11B), std::invalid_argument);  // irreducible, x not primitive
  CHECK_THROWS_AS(GaloisField(8, 0x21D), std::invalid_argument);  // wrong degree
  CHECK_THROWS_AS(GaloisField(12, 0x1053), std::invalid_argument);
  const GaloisField g(8, 0x12B);
  for (std::uint32_t a = 0; a < 256; a += 7)
    for (std::uint32_t b = 0; b < 256; b += 3)
      REQUIRE(g.mul(static_cast<Element>(a), static_cast<Element>(b)) ==
              oracle::shift_and_reduce_mul(a, b, 0x12B, 8));
}

TEST_CASE("vector kernels") {
  for (const GaloisField* f : {&GaloisField::gf256(), &GaloisField::gf65536()}) {
    auto rng = RandomStream::derive(f->bits(), 1);
    for (std::size_t n : {1u, 17u, 64u, 300u}) {
      std::vector<Element> src(n), dst(n);
      for (auto& v : src) v = static_cast<Element>(rng.uniform_below(f->size()));
      for (auto& v : dst) v = static_cast<Element>(rng.uniform_below(f->size()));
      const auto c = static_cast<Element>(rng.uniform_below(f->size()));
      auto expect = dst;
      for (std::size_t i = 0; i < n; ++i) expect[i] ^= f->mul(c, src[i]);
      f->axpy(dst, c, src);
      CHECK(dst == expect);
      auto scaled = src;
      f->scale(scaled, c);
      for (std::size_t i = 0; i < n; ++i) CHECK(scaled[i] == f->mul(c, src[i]));
    }
  }
}

TEST_CASE("matrices") {
  const auto& f = GaloisField::gf256();
  auto rng = RandomStream::derive(3, 3);
  const auto a = random_matrix(f, 4, 5, rng);
  CHECK(multiply(f, a, Matrix::identity(5)) == a);
  CHECK(multiply(f, Matrix::identity(4), a) == a);
  CHECK_THROWS_AS(multiply(f, a, a), ShapeError);
  CHECK_THROWS_AS(gauss_jordan(f, a, Matrix(3, 1)), ShapeError);
}

TEST_CASE("elimination agrees with the fraction-free oracle") {
  for (const GaloisField* f : {&GaloisField::gf256(), &GaloisField::gf65536()}) {
    auto rng = RandomStream::derive(17, f->bits());
    for (int inst = 0; inst < 100; ++inst) {
      const std::size_t r = 1 + rng.uniform_below(12);
      const std::size_t c = 1 + rng.uniform_below(12);
      Matrix m;
      if (inst % 3 == 0) {
        // Product of thin factors: rank at most the inner dimension.
        const std::size_t inner = 1 + rng.uniform_below(std::min(r, c));
        m = multiply(*f, random_matrix(*f, r, inner, rng), random_matrix(*f, inner, c, rng));
      } else {
        m = random_matrix(*f, r, c, rng, inst % 3 == 1 ? 0.3 : 1.0);
      }
      const auto x = random_matrix(*f, c, 2, rng);
      const auto b = matvec(*f, m, x);
      const auto res = gauss_jordan(*f, m, b);

      REQUIRE(res.rank == oracle::fraction_free_rank(to_rows(m), f->polynomial(), f->bits()));
      CHECK(res.consistent);
      CHECK(res.pivot_columns.size() == res.rank);
      CHECK(res.pivot_columns.size() + res.free_columns.size() == c);
      // Reduced row-echelon shape.
      for (std::size_t i = 0; i < res.rank; ++i) {
        const auto pc = res.pivot_columns[i];
        if (i > 0) CHECK(pc > res.pivot_columns[i - 1]);
        for (std::size_t j = 0; j < r; ++j) CHECK(res.reduced.at(j, pc) == (i == j ? 1 : 0));
        for (std::size_t j = 0; j < pc; ++j) CHECK(res.reduced.at(i, j) == 0);
      }
      for (std::size_t i = res.rank; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) CHECK(res.reduced.at(i, j) == 0);
      // Setting free variables to zero gives a particular solution of m y = b.
      Matrix y(c, 2);
      for (std::size_t i = 0; i < res.rank; ++i)
        for (std::size_t k = 0; k < 2; ++k) y.at(res.pivot_columns[i], k) = res.reduced_rhs.at(i, k);
      CHECK(matvec(*f, m, y) == b);
      if (res.rank == c) {
        REQUIRE(res.solution.has_value());
        CHECK(*res.solution == x);
      } else {
        CHECK(!res.solution.has_value());
      }
    }
  }
}

TEST_CASE("elimination edge cases") {
  const auto& f = GaloisField::gf256();
  auto rng = RandomStream::derive(23, 0);

  SUBCASE("inverse of an invertible matrix") {
    int found = 0;
    while (found < 20) {
      const auto m = random_matrix(f, 6, 6, rng);
      const auto res = gauss_jordan(f, m, Matrix::identity(6));
      if (res.rank < 6) continue;
      ++found;
      CHECK(multiply(f, m, *res.solution) == Matrix::identity(6));
      CHECK(multiply(f, *res.solution, m) == Matrix::identity(6));
    }
  }
  SUBCASE("row operations preserve rank") {
    for (int t = 0; t < 20; ++t) {
      auto m = random_matrix(f, 7, 5, rng, 0.4);
      const auto before = gauss_jordan(f, m, Matrix(7, 0)).rank;
      m.swap_rows(0, 6);
      const auto c = static_cast<Element>(1 + rng.uniform_below(255));
      f.axpy(m.row(2), c, m.row(3));
      f.scale(m.row(4), c);
      CHECK(gauss_jordan(f, m, Matrix(7, 0)).rank == before);
    }
  }
  SUBCASE("inconsistent system") {
    Matrix m(2, 2);
    m.at(0, 0) = 1;
    m.at(0, 1) = 2;
    m.at(1, 0) = 1;
    m.at(1, 1) = 2;
    Matrix b(2, 1);
    b.at(0, 0) = 5;
    b.at(1, 0) = 6;
    const auto res = gauss_jordan(f, m, b);
    CHECK(res.rank == 1);
    CHECK(!res.consistent);
    CHECK(!res.solution.has_value());
  }
  SUBCASE("zero and empty matrices") {
    const auto z = gauss_jordan(f, Matrix(3, 4), Matrix(3, 1));
    CHECK(z.rank == 0);
    CHECK(z.free_columns.size() == 4);
    CHECK(z.consistent);
    const auto e = gauss_jordan(f, Matrix(0, 0), Matrix(0, 0));
    CHECK(e.rank == 0);
  }
}
