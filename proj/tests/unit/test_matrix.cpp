#include <doctest.h>

#include <cmath>
#include <limits>

#include "iidgan/error.hpp"
#include "iidgan/format.hpp"
#include "iidgan/matrix.hpp"
#include "test_util.hpp"

using namespace iidgan;

TEST_CASE("construction and shape errors") {
  Matrix m{{1, 2, 3}, {4, 5, 6}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6);
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), ShapeError);
  CHECK(Matrix::identity(3)(1, 1) == 1.0);
  CHECK(Matrix::identity(3)(1, 2) == 0.0);
}

TEST_CASE("matmul, transpose and products") {
  const Matrix a{{1, 2}, {3, 4}, {5, 6}};
  const Matrix b{{1, 0, 2}, {0, 1, 3}};
  const Matrix ab = matmul(a, b);
  CHECK(ab == Matrix{{1, 2, 8}, {3, 4, 18}, {5, 6, 28}});
  CHECK(matmul_bt(a, a) == matmul(a, a.transposed()));
  CHECK(a.transposed().transposed() == a);
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
  CHECK((a + a) == 2.0 * a);
  CHECK((a - a) == Matrix(3, 2));
  CHECK(max_abs(a) == 6.0);
  CHECK(frobenius_norm(Matrix{{3, 4}}) == doctest::Approx(5.0));
}

TEST_CASE("rows, columns and slices") {
  const Matrix a{{1, 2}, {3, 4}, {5, 6}};
  CHECK(a.column(1) == std::vector<double>{2, 4, 6});
  CHECK(a.slice_rows(1, 3) == Matrix{{3, 4}, {5, 6}});
  CHECK_THROWS_AS(a.slice_rows(2, 4), ShapeError);
}

TEST_CASE("non-finite detection") {
  Matrix a{{1, 2}};
  CHECK(a.all_finite());
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(a.all_finite());
  CHECK_THROWS_AS(require_finite(a, "a"), NonFiniteError);
}

TEST_CASE("format_double round-trips") {
  iidgan::Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.below(80)) - 40);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(3.0) == "3");
}
