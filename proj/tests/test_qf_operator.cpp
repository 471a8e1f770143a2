#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "qsix/qf_operator.hpp"

using namespace qsix;
using C = std::complex<double>;
using P = ModelParams<double>;

namespace {

const P kGeneric = P::generic({0.55, 0.08}, {0.8, 0.3}, {1.3, -0.2}, {0.9, 0.4});

double rel_diff(const ComplexMatrix<double>& a, const ComplexMatrix<double>& b) {
  return max_abs((a - b).eval()) / std::max(max_abs(a), max_abs(b));
}

// Literal tensor assembly of the monomial action: independent of the
// composition route inside build_qf. Sums over all per-site split indices
// with everything built from naive std::pow products.
ComplexMatrix<double> qf_tensor_oracle(const P& p, const SectorBasis& basis) {
  const int M = basis.sites();
  const C q2 = p.q * p.q;
  auto npoch = [&](C x, int n) {
    C r = 1;
    for (int k = 0; k < n; ++k) r *= C(1) - x * std::pow(q2, k);
    return r;
  };
  ComplexMatrix<double> out =
      ComplexMatrix<double>::Zero(basis.size(), basis.size());
  for (int col = 0; col < basis.size(); ++col) {
    const Monomial& j = basis.member(col);
    C pref = 1;
    for (int k = 0; k < M; ++k)
      pref *= std::pow(p.lambda / p.zeta, j[k]) * npoch(q2, j[k]) /
              npoch(std::pow(p.zeta, -4), j[k]);
    // iterate over l_1..l_M with 0 <= l_k <= j_k
    std::vector<int> lv(M, 0);
    while (true) {
      C w = 1;
      Monomial img(M, 0);
      for (int k = 0; k < M; ++k) {
        w *= std::pow(p.phi * p.phi / (p.lambda * p.lambda), lv[k]) *
             npoch(p.lambda * p.lambda / (p.zeta * p.zeta), lv[k]) *
             npoch(C(1) / (p.lambda * p.lambda * p.zeta * p.zeta),
                   j[k] - lv[k]) /
             (npoch(q2, lv[k]) * npoch(q2, j[k] - lv[k]));
        img[k] = j[k] - lv[k] + lv[(k + 1) % M];
      }
      out(basis.index_of(img), col) += pref * w;
      int pos = 0;
      while (pos < M && lv[pos] == j[pos]) lv[pos++] = 0;
      if (pos == M) break;
      ++lv[pos];
    }
  }
  return out;
}

}  // namespace

TEST_CASE("monomial action: normalization and identity point") {
  const auto row0 = qf_monomial_action(kGeneric, 0);
  REQUIRE(row0.coeff.size() == 1);
  CHECK(row0.coeff[0] == C(1));

  const P at_zeta = kGeneric.with_lambda(kGeneric.zeta);
  for (int m = 1; m <= 5; ++m) {
    const auto row = qf_monomial_action(at_zeta, m);
    REQUIRE(row.coeff.size() == static_cast<std::size_t>(m) + 1);
    CHECK(std::abs(row.coeff[0] - C(1)) < 1e-13);
    for (int k = 1; k <= m; ++k) CHECK(std::abs(row.coeff[k]) < 1e-13);
  }
}

TEST_CASE("monomial action: coefficient sum at phi=1, lambda=1/zeta") {
  const P p = P::generic(kGeneric.q, kGeneric.zeta, C(1, 0),
                         C(1, 0) / kGeneric.zeta);
  const C q2 = p.q * p.q;
  for (int m = 1; m <= 5; ++m) {
    const auto row = qf_monomial_action(p, m);
    C sum = 0;
    for (const C& c : row.coeff) sum += c;
    // direct summation oracle over k with naive pochhammers
    auto npoch = [&](C x, int n) {
      C r = 1;
      for (int k = 0; k < n; ++k) r *= C(1) - x * std::pow(q2, k);
      return r;
    };
    C ref = 0;
    for (int k = 0; k <= m; ++k) {
      ref += std::pow(p.phi * p.phi / (p.lambda * p.lambda), k) *
             npoch(p.lambda * p.lambda / (p.zeta * p.zeta), k) *
             npoch(C(1) / (p.lambda * p.lambda * p.zeta * p.zeta), m - k) /
             (npoch(q2, k) * npoch(q2, m - k));
    }
    ref *= std::pow(p.lambda / p.zeta, m) * npoch(q2, m) /
           npoch(std::pow(p.zeta, -4), m);
    CHECK(std::abs(sum - ref) < 1e-12 * (1.0 + std::abs(ref)));
  }
}

TEST_CASE("integer spin makes the action singular beyond the cap") {
  const P p = P::integer_spin({0.6, 0}, 2, {1.3, 0}, {0.9, 0.4});
  CHECK_NOTHROW(qf_monomial_action(p, 2));
  CHECK_THROWS_AS(qf_monomial_action(p, 3), SingularityError);
}

TEST_CASE("build_qf at lambda = zeta is the identity") {
  for (auto [M, l] : {std::pair{2, 2}, {3, 2}, {2, 3}}) {
    const SectorBasis basis = enumerate_basis(M, l);
    const auto Q = build_qf(kGeneric.with_lambda(kGeneric.zeta), basis);
    CHECK(max_abs((Q.entries -
                   ComplexMatrix<double>::Identity(basis.size(), basis.size()))
                      .eval()) < 1e-13);
  }
}

TEST_CASE("build_qf: M=1 diagonal closed form") {
  const SectorBasis basis = enumerate_basis(1, 3);
  const auto Q = build_qf(kGeneric, basis);
  const auto row = qf_monomial_action(kGeneric, 3);
  C diag = 0;
  for (const C& c : row.coeff) diag += c;  // x_0 = x_1 folds all terms
  CHECK(std::abs(Q.entries(0, 0) - diag) < 1e-13 * std::abs(diag));
}

TEST_CASE("build_qf equals the tensor-assembled action") {
  for (auto [M, l] : {std::pair{2, 2}, {2, 3}, {3, 2}}) {
    const SectorBasis basis = enumerate_basis(M, l);
    const auto Q = build_qf(kGeneric, basis);
    const auto ref = qf_tensor_oracle(kGeneric, basis);
    CHECK(rel_diff(Q.entries, ref) < 1e-12);
  }
}

TEST_CASE("qf_element single-sum formula agrees with build_qf") {
  for (auto [M, l] : {std::pair{2, 2}, {3, 3}}) {
    const SectorBasis basis = enumerate_basis(M, l);
    const auto Q = build_qf(kGeneric, basis);
    ComplexMatrix<double> E(basis.size(), basis.size());
    for (int r = 0; r < basis.size(); ++r)
      for (int c = 0; c < basis.size(); ++c)
        E(r, c) = qf_element(kGeneric, basis.member(r), basis.member(c));
    CHECK(rel_diff(Q.entries, E) < 1e-12);
  }
}

TEST_CASE("degree preservation is structural") {
  std::map<Monomial, C> unit;
  unit[{2, 1, 0}] = C(1);
  for (const auto& [m, v] : apply_qf(kGeneric, unit)) {
    int deg = 0;
    for (int e : m) deg += e;
    CHECK(deg == 3);
  }
}

TEST_CASE("Q_f family commutes") {
  const SectorBasis basis = enumerate_basis(3, 3);
  std::mt19937_64 gen(7);
  auto draw = [&] {
    const double r = 0.6 + 0.9 * ((gen() >> 11) * 0x1.0p-53);
    const double t = 2 * M_PI * ((gen() >> 11) * 0x1.0p-53);
    return C(r * std::cos(t), r * std::sin(t));
  };
  for (int rep = 0; rep < 5; ++rep) {
    const auto Qa = build_qf(kGeneric.with_lambda(draw()), basis);
    const auto Qb = build_qf(kGeneric.with_lambda(draw()), basis);
    CHECK(commutator_residual(Qa.entries, Qb.entries) < 1e-11);
  }
}

TEST_CASE("composition coefficients against brute-force composition") {
  const C mu(1.4, 0.25);
  const int M = 4, site = 1;  // x_{i-1}, x_i, x_{i+1} at 0,1,2; no wraparound
  for (int m = 0; m <= 5; ++m) {
    std::map<Monomial, C> poly;
    Monomial start(M, 0);
    start[site + 1] = m;
    poly[start] = C(1);
    poly = apply_qf(kGeneric.with_lambda(mu), poly);
    poly = apply_qf(kGeneric, poly);
    for (int n = 0; n <= m; ++n) {
      for (int k = 0; n + k <= m; ++k) {
        Monomial target(M, 0);
        target[site - 1] = n;
        target[site] = m - n - k;
        target[site + 1] += k;
        auto it = poly.find(target);
        const C bf = (it == poly.end()) ? C(0) : it->second;
        const C cc = compose_coeff(kGeneric, mu, m, n, k);
        CHECK(std::abs(bf - cc) < 1e-12 * (1.0 + std::abs(bf) + std::abs(cc)));
      }
    }
  }
}

TEST_CASE("composition coefficients: normalization and Sears symmetry") {
  CHECK(std::abs(compose_coeff(kGeneric, C(1.4, 0.25), 0, 0, 0) - C(1)) <
        1e-15);
  const C mu(1.4, 0.25);
  for (int m = 0; m <= 5; ++m)
    for (int n = 0; n <= m; ++n)
      for (int k = 0; n + k <= m; ++k) {
        const C c1 = compose_coeff(kGeneric, mu, m, n, k);
        const C c2 = compose_coeff(kGeneric.with_lambda(mu), kGeneric.lambda,
                                   m, n, k);
        CHECK(std::abs(c1 - c2) < 1e-11 * (std::abs(c1) + std::abs(c2) + 1.0));
      }
  CHECK_THROWS_AS(compose_coeff(kGeneric, mu, 2, 2, 1), DomainError);
}

TEST_CASE("Q_infinity: trivial sector and hand-assembled entries") {
  const SectorBasis b0 = enumerate_basis(2, 0);
  const auto q0 = build_qinf(kGeneric, b0);
  CHECK(std::abs(q0.entries(0, 0) - C(1)) < 1e-15);

  // (M,l) = (2,1): assemble the sums literally
  const SectorBasis b = enumerate_basis(2, 1);
  const auto qi = build_qinf(kGeneric, b);
  const C q2 = kGeneric.q * kGeneric.q;
  const C z = kGeneric.zeta, phi = kGeneric.phi;
  auto npoch = [&](C x, int n) {
    C r = 1;
    for (int k = 0; k < n; ++k) r *= C(1) - x * std::pow(q2, k);
    return r;
  };
  auto entry = [&](const Monomial& iv, const Monomial& jv) {
    C pref = std::pow(z, -1.0);
    for (int k = 0; k < 2; ++k) pref /= npoch(std::pow(z, -4), jv[k]);
    C tot = 0;
    for (int l1 = 0; l1 <= 1; ++l1) {
      const int p0 = l1;
      const int p1 = l1 + iv[0] - jv[0];
      if (p0 < 0 || p0 > jv[0] || p1 < 0 || p1 > jv[1]) continue;
      C t = 1;
      t *= npoch(std::pow(kGeneric.q, -2.0 * jv[0]), p0) / npoch(q2, p0) *
           std::pow(std::pow(kGeneric.q, jv[0]) * phi / z, 2.0 * p0);
      t *= npoch(std::pow(kGeneric.q, -2.0 * jv[1]), p1) / npoch(q2, p1) *
           std::pow(std::pow(kGeneric.q, jv[1]) * phi / z, 2.0 * p1);
      tot += t;
    }
    return pref * tot;
  };
  for (int r = 0; r < b.size(); ++r)
    for (int c = 0; c < b.size(); ++c)
      CHECK(std::abs(qi.entries(r, c) - entry(b.member(r), b.member(c))) <
            1e-13 * (1.0 + std::abs(qi.entries(r, c))));
}

TEST_CASE("lambda^{-l} Q_f approaches Q_infinity at rate lambda^{-2}") {
  const SectorBasis basis = enumerate_basis(2, 2);
  const auto qinf = build_qinf(kGeneric, basis);
  const double scale = max_abs(qinf.entries);
  double dev[2];
  int idx = 0;
  for (double lam : {1e3, 1e4}) {
    const auto qf = build_qf(kGeneric.with_lambda(C(lam, 0)), basis);
    dev[idx++] = max_abs((qf.entries / ipow(C(lam, 0), 2) - qinf.entries).eval()) /
                 scale;
  }
  CHECK(dev[0] < 1e-4);
  CHECK(dev[1] < 1e-6);
  CHECK(dev[0] / dev[1] > 50);
  CHECK(dev[0] / dev[1] < 200);
}

TEST_CASE("generating function identity, coefficientwise") {
  CHECK(genfun_residual(kGeneric, {}, 0, 2) == 0.0);
  CHECK(genfun_residual(kGeneric, {}, 2, 2) < 1e-11);
  CHECK(genfun_residual(kGeneric, {}, 3, 2) < 1e-11);
  const P phi1 = P::generic(kGeneric.q, kGeneric.zeta, C(1, 0), kGeneric.lambda);
  CHECK(genfun_residual(phi1, {}, 3, 2) < 1e-11);
  const std::vector<C> mus = {C(0.8, 0.2), C(1.1, -0.4)};
  CHECK(genfun_residual(kGeneric, mus, 3, 2) < 1e-11);
}
