// Acceptance suite: one check per published criterion, every tolerance fixed
// in this file. Prints one PASS/FAIL line per criterion and exits nonzero if
// any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "qsix/verify.hpp"

using namespace qsix;
using namespace qsix::verify;
using C = Cplx;

namespace {

int failures = 0;

struct Criterion {
  const char* label;
  double worst = 0;
  double tol;
  bool ok = true;
  std::chrono::steady_clock::time_point start;
  double budget_s;

  Criterion(const char* label, double tol, double budget_s)
      : label(label), tol(tol), start(std::chrono::steady_clock::now()),
        budget_s(budget_s) {}

  void observe(double residual) {
    worst = std::max(worst, residual);
    ok &= residual < tol;
  }
  void require(bool condition) { ok &= condition; }

  void finish() {
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    ok &= secs < budget_s;
    std::printf("[%s] %s: worst residual %.3e (tol %.1e), %.2f s (budget %g s)\n",
                ok ? "PASS" : "FAIL", label, worst, tol, secs, budget_s);
    if (!ok) ++failures;
  }
};

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * ((gen() >> 11) * 0x1.0p-53);
  }
  C annulus(double rlo, double rhi) {
    const double r = uniform(rlo, rhi);
    const double t = uniform(0, 2 * M_PI);
    return {r * std::cos(t), r * std::sin(t)};
  }
};

const Params kGeneric =
    Params::generic({0.55, 0.08}, {0.8, 0.3}, {1.3, -0.2}, {0.9, 0.4});

void criterion1_qkernel() {
  Criterion c("1. q-kernel self-tests", 1e-12, 1.0);
  Rng rng(101);
  for (int rep = 0; rep < 100; ++rep) {
    const long i = static_cast<long>(rng.uniform(0, 9));
    const double r = rng.uniform(0.2, 0.9);
    const double th = rng.uniform(0, 2 * M_PI);
    const C q(r * std::cos(th), r * std::sin(th));
    const C x = rng.annulus(1.5, 3.0);
    c.observe(geom_identity_residual(i, x, q));
  }
  for (int rep = 0; rep < 50; ++rep) {
    SeriesSpec<double> s;
    s.a = {rng.annulus(0.1, 1.0), rng.annulus(0.1, 1.0)};
    s.b = {rng.annulus(1.3, 2.0), rng.annulus(1.3, 2.0)};
    s.n = static_cast<int>(rng.uniform(0, 7));
    s.q = rng.annulus(0.25, 0.75);
    s.z = rng.annulus(0.1, 1.0);
    C scale = 1;
    for (const C& b : s.b) scale *= qpoch(b, s.q, s.n);
    const C reg = phi_regularized(s);
    const C via = phi_standard(s) * scale;
    c.observe(std::abs(reg - via) / (std::abs(reg) + std::abs(via)));
  }
  c.finish();
}

void criterion2_askey_roy() {
  Criterion c("2. Askey-Roy integral", 1e-8, 1.0);
  Rng rng(202);
  c.observe(askey_roy_residual(C(0.3), C(0.3), C(0.3), C(0.3), C(0.7),
                               C(0.5), 1024));
  for (int rep = 0; rep < 3; ++rep) {
    const C a = rng.annulus(0.05, 0.5), b = rng.annulus(0.05, 0.5);
    const C d = rng.annulus(0.05, 0.5), e = rng.annulus(0.05, 0.5);
    const double th = rng.uniform(0, 2 * M_PI);
    const C q = 0.5 * C(std::cos(th), std::sin(th));
    c.observe(askey_roy_residual(a, b, d, e, rng.annulus(0.4, 0.8), q, 1024));
  }
  // geometric convergence, demonstrated where it is observable
  const C a(0.3), b(0.2), cc(0.4), d(0.97), rho(0.7), q(0.5);
  const double r256 = askey_roy_residual(a, b, cc, d, rho, q, 256);
  const double r512 = askey_roy_residual(a, b, cc, d, rho, q, 512);
  const double r1024 = askey_roy_residual(a, b, cc, d, rho, q, 1024);
  c.require(r256 > r512 && r512 > r1024 && r512 < 0.1 * r256);
  c.observe(r1024);
  c.finish();
}

void criterion3_oracle_equivalence() {
  Criterion c("3. transfer oracle equivalence", 1e-12, 5.0);
  for (int M : {2, 3}) {
    for (int l = 0; l <= 3; ++l) {
      const SectorBasis basis = enumerate_basis(M, l);
      const auto direct = build_transfer(kGeneric, basis);
      const auto oracle = build_transfer_qdiff(kGeneric, basis);
      const double scale =
          std::max(max_abs(direct.entries), max_abs(oracle.entries));
      c.observe(max_abs((direct.entries - oracle.entries).eval()) / scale);
    }
  }
  c.finish();
}

void criterion4_tq() {
  Criterion cq("4a. TQ relation, Q_f (generic)", 1e-10, 30.0);
  Rng rng(404);
  std::vector<C> lambdas;
  for (int k = 0; k < 10; ++k) lambdas.push_back(rng.annulus(0.6, 1.6));
  for (int M : {2, 3})
    for (int l = 0; l <= 3; ++l) {
      const SectorBasis basis = enumerate_basis(M, l);
      for (const C& lam : lambdas)
        cq.observe(tq_residual(kGeneric.with_lambda(lam), basis, QOp::Qf));
    }
  cq.finish();

  Criterion ca("4b. TQ relation, A+- (trace path, I in {1,2})", 1e-9, 30.0);
  for (int I : {1, 2}) {
    const Params plus =
        Params::integer_spin({0.58, 0}, I, {2.1, 0.3}, {1.0, 0.0});
    const Params minus =
        Params::integer_spin({0.58, 0}, I, {0.4, 0.05}, {1.0, 0.0});
    for (int M : {2, 3}) {
      for (int l = 0; l <= std::min(3, I * M); ++l) {
        const SectorBasis basis = enumerate_basis(M, l, I);
        for (int k = 0; k < 10; ++k) {
          const C lam = rng.annulus(0.7, 1.4);
          ca.observe(tq_residual(plus.with_lambda(lam), basis, QOp::Aplus,
                                 QOpPath::Trace));
          ca.observe(tq_residual(minus.with_lambda(lam), basis, QOp::Aminus,
                                 QOpPath::Trace));
        }
      }
    }
  }
  ca.finish();
}

void criterion5_commutativity() {
  Criterion cf("5a. commutativity, Q_f family", 1e-11, 30.0);
  Rng rng(505);
  for (int k = 0; k < 20; ++k) {
    const C lam = rng.annulus(0.6, 1.5), mu = rng.annulus(0.6, 1.5);
    for (auto [M, l] : {std::pair{2, 2}, {3, 3}}) {
      const SectorBasis basis = enumerate_basis(M, l);
      cf.observe(commutativity_residual(kGeneric, basis, lam, mu,
                                        CommutePair::QfQf));
      cf.observe(commutativity_residual(kGeneric, basis, lam, mu,
                                        CommutePair::QfT));
      cf.observe(commutativity_residual(kGeneric, basis, lam, mu,
                                        CommutePair::TT));
    }
  }
  cf.finish();

  Criterion ca("5b. commutativity, A+- family", 1e-9, 30.0);
  for (int I : {1, 2}) {
    const Params p =
        Params::integer_spin({0.58, 0}, I, {1.7, 0.2}, {1.25, 0.45});
    const SectorBasis basis = enumerate_basis(2, std::min(2, I), I);
    for (int k = 0; k < 20; ++k) {
      const C lam = rng.annulus(0.7, 1.4), mu = rng.annulus(0.7, 1.4);
      ca.observe(commutativity_residual(p, basis, lam, mu,
                                        CommutePair::AplusAminus));
      ca.observe(
          commutativity_residual(p, basis, lam, mu, CommutePair::TAplus));
      ca.observe(
          commutativity_residual(p, basis, lam, mu, CommutePair::TAminus));
    }
  }
  ca.finish();

  Criterion cs("5c. Sears symmetry of c(lambda,mu)", 1e-11, 10.0);
  for (int k = 0; k < 6; ++k) {
    const C lam = rng.annulus(0.7, 1.4), mu = rng.annulus(0.7, 1.4);
    for (int m = 0; m <= 5; ++m)
      for (int n = 0; n <= m; ++n)
        for (int kk = 0; n + kk <= m; ++kk) {
          const C c1 = compose_coeff(kGeneric.with_lambda(lam), mu, m, n, kk);
          const C c2 = compose_coeff(kGeneric.with_lambda(mu), lam, m, n, kk);
          cs.observe(std::abs(c1 - c2) / (std::abs(c1) + std::abs(c2) + 1.0));
        }
  }
  cs.finish();
}

void criterion6_factorization() {
  {
    Criterion c("6a. factorization A+(lam) = A+(zeta) Q_f(lam)", 1e-9, 30.0);
    const Params p = Params::generic({0.55, 0.08}, {0.8, 0.3}, {2.6, -0.3},
                                     {0.9, 0.4});
    Rng rng(606);
    for (int l = 0; l <= 3; ++l) {
      const SectorBasis basis = enumerate_basis(2, l);
      for (int k = 0; k < 3; ++k)
        c.observe(factorization_residual(p.with_lambda(rng.annulus(0.7, 1.3)),
                                         basis));
    }
    c.finish();
  }
  Criterion ci("6b. identity point Q_f(zeta) = 1", 1e-13, 10.0);
  for (int l = 0; l <= 3; ++l)
    ci.observe(identity_point_residual(kGeneric, enumerate_basis(2, l)));
  ci.finish();
}

void criterion7_wronskian() {
  Criterion c("7. Wronskian identity", 1e-8, 30.0);
  Rng rng(707);
  for (int M : {1, 2}) {
    const Params p =
        Params::integer_spin({0.58, 0}, 1, {1.7, 0.2}, {1.25, 0.45});
    for (int l = 0; l <= M; ++l) {
      const SectorBasis basis = enumerate_basis(M, l, 1);
      for (int k = 0; k < 3; ++k)
        c.observe(wronskian_residual(p.with_lambda(rng.annulus(0.7, 1.4)),
                                     basis));
    }
  }
  const Params p2 = Params::integer_spin({0.58, 0}, 2, {1.7, 0.2}, {1.25, 0.45});
  c.observe(wronskian_residual(p2, enumerate_basis(2, 2, 2)));
  c.finish();
}

void criterion8_inversion_asymptotics() {
  Criterion c("8a. inversion A+(zeta) Q_inf", 1e-10, 10.0);
  c.observe(inversion_residual(kGeneric, enumerate_basis(2, 0)));
  c.observe(inversion_residual(kGeneric, enumerate_basis(2, 2)));
  c.observe(inversion_residual(kGeneric, enumerate_basis(3, 2)));
  c.finish();

  Criterion ca("8b. asymptotics with O(lambda^-2) scaling", 1e-6, 30.0);
  for (auto [M, l] : {std::pair{2, 1}, {2, 2}, {3, 2}}) {
    const SectorBasis basis = enumerate_basis(M, l);
    const auto ap = aplus_asymptotics(kGeneric, basis);
    ca.observe(ap.dev_hi);
    ca.require(ap.ratio > 50 && ap.ratio < 200);
    const auto qf = qf_asymptotics(kGeneric, basis);
    ca.observe(qf.dev_hi);
    ca.require(qf.ratio > 50 && qf.ratio < 200);
  }
  ca.finish();
}

void criterion9_bethe() {
  Criterion c("9. Bethe roots at I = 1", 1e-6, 30.0);
  const Params p = Params::integer_spin({0.58, 0}, 1, {1.45, 0}, {1.13, 0.21});
  for (int l : {1, 2}) {
    const SectorBasis basis = enumerate_basis(2, l, 1);
    const auto report = bethe_roots(p, basis);
    c.require(report.families.size() == 2);
    for (const auto& fam : report.families) {
      const int expected = (fam.op == QOp::Aplus) ? l : 2 - l;
      c.require(fam.expected_count == expected);
      for (const auto& e : fam.entries) {
        c.require(static_cast<int>(e.roots.size()) == expected);
        for (double res : e.residuals) c.observe(res);
      }
    }
  }
  c.finish();
}

void criterion10_genfun() {
  Criterion c("10. generating-function identity", 1e-11, 30.0);
  Rng rng(1010);
  c.observe(genfun_residual(kGeneric, {}, 3, 2));
  const Params p2 = Params::generic(rng.annulus(0.4, 0.6), rng.annulus(0.7, 1.0),
                                    rng.annulus(0.9, 1.5), rng.annulus(0.8, 1.2));
  c.observe(genfun_residual(p2, {}, 3, 2));
  c.finish();
}

}  // namespace

int main() {
  criterion1_qkernel();
  criterion2_askey_roy();
  criterion3_oracle_equivalence();
  criterion4_tq();
  criterion5_commutativity();
  criterion6_factorization();
  criterion7_wronskian();
  criterion8_inversion_asymptotics();
  criterion9_bethe();
  criterion10_genfun();
  if (failures > 0) {
    std::printf("acceptance: %d criteria FAILED\n", failures);
    return 1;
  }
  std::printf("acceptance: all criteria passed\n");
  return 0;
}
