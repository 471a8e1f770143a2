#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsix/sector.hpp"

using namespace qsix;

namespace {

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

TEST_CASE("small bases match the expected member lists") {
  const SectorBasis b22 = enumerate_basis(2, 2);
  REQUIRE(b22.size() == 3);
  CHECK(b22.member(0) == Monomial{2, 0});
  CHECK(b22.member(1) == Monomial{1, 1});
  CHECK(b22.member(2) == Monomial{0, 2});

  const SectorBasis capped = enumerate_basis(2, 2, 1);
  REQUIRE(capped.size() == 1);
  CHECK(capped.member(0) == Monomial{1, 1});

  const SectorBasis b30 = enumerate_basis(3, 0);
  REQUIRE(b30.size() == 1);
  CHECK(b30.member(0) == Monomial{0, 0, 0});
}

TEST_CASE("uncapped sizes are binomial(M+l-1, l)") {
  for (int M = 1; M <= 6; ++M)
    for (int l = 0; l <= 6; ++l)
      CHECK(enumerate_basis(M, l).size() == binomial(M + l - 1, l));
}

TEST_CASE("capped sizes count bounded compositions") {
  for (int M = 1; M <= 4; ++M)
    for (int I = 0; I <= 3; ++I)
      for (int l = 0; l <= M * I; ++l) {
        // independent count by direct enumeration over the box
        long count = 0;
        std::vector<int> e(M, 0);
        while (true) {
          int total = 0;
          for (int v : e) total += v;
          if (total == l) ++count;
          int pos = 0;
          while (pos < M && e[pos] == I) e[pos++] = 0;
          if (pos == M) break;
          ++e[pos];
        }
        CHECK(enumerate_basis(M, l, I).size() == count);
      }
}

TEST_CASE("index_of is the exact inverse of members") {
  const SectorBasis b = enumerate_basis(3, 3);
  REQUIRE(b.size() == 10);
  CHECK(b.index_of(b.member(0)) == 0);
  CHECK(b.index_of(b.member(b.size() - 1)) == b.size() - 1);
  for (int k = 0; k < b.size(); ++k) CHECK(b.index_of(b.member(k)) == k);
}

TEST_CASE("graded-lex order, leftmost most significant, is descending") {
  const SectorBasis b = enumerate_basis(3, 4);
  for (int k = 1; k < b.size(); ++k) CHECK(b.member(k - 1) > b.member(k));
}

TEST_CASE("re-enumeration is bit-identical") {
  const SectorBasis a = enumerate_basis(4, 5, 3);
  const SectorBasis b = enumerate_basis(4, 5, 3);
  CHECK(a.members() == b.members());
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(enumerate_basis(2, 3, 1), DomainError);  // l > M*cap
  const SectorBasis b = enumerate_basis(2, 2);
  CHECK_THROWS_AS(b.index_of(Monomial{3, 0}), NotFoundError);
  CHECK_THROWS_AS(b.index_of(Monomial{1, 0}), NotFoundError);
}

TEST_CASE("operator matrix carrier") {
  const SectorBasis b = enumerate_basis(2, 2);
  OperatorMatrix<double> op(b);
  CHECK(op.dim() == 3);
  CHECK(op.entries.rows() == 3);
  CHECK(max_abs(op.entries) == 0.0);
  op.entries(1, 2) = {3.0, -4.0};
  CHECK(max_abs(op.entries) == 5.0);
}
