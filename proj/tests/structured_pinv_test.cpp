#include "mpx/structured_pinv.hpp"

#include <functional>

#include <gtest/gtest.h>

#include "mpx/generators.hpp"
#include "test_util.hpp"

namespace mpx {
namespace {

using test::diag;
using test::m2;

ComplexMatrix one(Complex v) { return ComplexMatrix::Constant(1, 1, v); }

InstanceSpec random_spec(Rng& rng, int max_dim, double cond, Flavor flavor) {
  const int m = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_dim));
  const int n = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_dim));
  const int r = static_cast<int>(rng.next() % static_cast<std::uint64_t>(std::min(m, n) + 1));
  const double c = std::pow(cond, rng.uniform());
  return InstanceSpec{.m = m, .n = n, .r = r, .sigma_cond = c, .flavor = flavor,
                      .seed = rng.next()};
}

PinvOptions permissive() {
  PinvOptions o;
  o.mode = HypothesisMode::permissive;
  return o;
}

TEST(Method, NamesRoundTrip) {
  for (Method m : {Method::oracle, Method::lemma21, Method::thm31_xn, Method::thm31_ny,
                   Method::thm33, Method::cor34, Method::cgms11}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_FALSE(parse_method("thm31"));
  EXPECT_FALSE(parse_method(""));
}

TEST(PinvOracleResult, RecordsResiduals) {
  Rng rng(40);
  const ComplexMatrix a = gaussian_matrix(4, 3, rng);
  const auto res = pinv_oracle_result(a);
  EXPECT_EQ(res.method, Method::oracle);
  EXPECT_TRUE(res.hypothesis_checks.empty());
  EXPECT_TRUE(res.hypotheses_hold());
  EXPECT_LE(res.residuals.max(), 1e-10);
}

TEST(PinvBlock, Examples) {
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix z2 = ComplexMatrix::Zero(2, 2);
  const auto trivial = pinv_block(id, z2, z2, z2);
  EXPECT_EQ(trivial.method, Method::lemma21);
  EXPECT_TRUE(approx_eq<Complex>(trivial.z, block_assemble<Complex>(id, z2, z2, z2),
                                 Tolerance{1e-15}));

  // The all-ones 2x2 has pseudo-inverse ones / 4.
  const auto ones = pinv_block(one(1), one(1), one(1), one(1));
  EXPECT_TRUE(approx_eq<Complex>(ones.z, ComplexMatrix::Constant(2, 2, 0.25), Tolerance{1e-15}));
  EXPECT_TRUE(ones.hypotheses_hold());
  EXPECT_EQ(ones.hypothesis_checks.size(), 3u);

  // [[1, 0], [2, 0]]† = [[1, 2], [0, 0]] / 5.
  const auto col = pinv_block(one(1), one(2), one(0), one(0));
  EXPECT_TRUE(approx_eq<Complex>(col.z, m2(0.2, 0.4, 0, 0), Tolerance{1e-15}));
  EXPECT_LE(col.residuals.max(), 1e-15);
}

TEST(PinvBlock, HypothesisViolations) {
  try {
    pinv_block(one(0), one(1), one(0), one(0));
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.check(), "range(B*) in range(A*)");
    EXPECT_GT(e.residual(), 0.5);
  }
  try {
    pinv_block(one(1), one(1), one(1), one(2));
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.check(), "D = B A+ C");
    EXPECT_NE(std::string(e.what()).find("D = B A+ C"), std::string::npos);
  }
  const auto loose = pinv_block(one(0), one(0), one(1), one(0), permissive());
  EXPECT_FALSE(loose.hypotheses_hold());
  EXPECT_FALSE(loose.hypothesis_checks[1].passed);
  EXPECT_THROW(pinv_block(one(1), ComplexMatrix(1, 2), one(1), one(1)), DimensionError);
}

TEST(PinvBlock, MatchesOracleUnderHypotheses) {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = static_cast<Eigen::Index>(1 + rng.next() % 6);
    const auto q = static_cast<Eigen::Index>(1 + rng.next() % 6);
    const auto s = static_cast<Eigen::Index>(1 + rng.next() % 5);
    const auto t = static_cast<Eigen::Index>(1 + rng.next() % 5);
    const auto rank = static_cast<Eigen::Index>(rng.next() % (std::min(p, q) + 1));
    const ComplexMatrix a = test::random_rank(p, q, rank, 10, rng);
    const ComplexMatrix b = gaussian_matrix(s, p, rng) * a;  // rows of B in the row space of A
    const ComplexMatrix c = a * gaussian_matrix(q, t, rng);  // columns of C in range(A)
    const ComplexMatrix d = b * test::reference_pinv(a) * c;
    const auto res = pinv_block(a, b, c, d);
    const ComplexMatrix m = block_assemble(a, c, b, d);
    SCOPED_TRACE(trial);
    EXPECT_TRUE(res.hypotheses_hold());
    EXPECT_TRUE(approx_eq(res.z, test::reference_pinv(m), Tolerance{1e-8}));
    EXPECT_LE(res.residuals.max(), 1e-9);
  }
}

TEST(PinvXn, Examples) {
  const auto fd = svd(diag({1, 0}));
  const auto worked = pinv_xn(m2(2, 0, 1, 1), diag({1, 0}), fd);
  EXPECT_EQ(worked.method, Method::thm31_xn);
  EXPECT_TRUE(approx_eq(worked.z, m2(0.4, 0.2, 0, 0), Tolerance{1e-15}));
  EXPECT_TRUE(approx_eq(proj_range_m1(m2(2, 0, 1, 1), diag({1, 0}), fd),
                        m2(0.8, 0.4, 0.4, 0.2), Tolerance{1e-15}));

  Rng rng(42);
  const ComplexMatrix n = test::random_rank(4, 3, 2, 10, rng);
  const auto f = svd(n);
  const ComplexMatrix id = ComplexMatrix::Identity(4, 4);
  EXPECT_TRUE(approx_eq(pinv_xn(id, n, f).z, pinv_oracle(n), Tolerance{1e-14}));
  EXPECT_TRUE(approx_eq<Complex>(proj_range_m1(id, n, f), range_projector(f), Tolerance{1e-14}));

  const ComplexMatrix zero = ComplexMatrix::Zero(4, 3);
  const ComplexMatrix x = random_nonsingular(4, rng);
  EXPECT_EQ(pinv_xn(x, zero, svd(zero)).z, ComplexMatrix::Zero(3, 4));
  EXPECT_EQ(proj_range_m1(x, zero, svd(zero)), ComplexMatrix::Zero(4, 4));
}

TEST(PinvNy, Examples) {
  // Dual of the worked example: (N* X*)† = ((X N)†)*.
  const auto fd = svd(diag({1, 0}));
  const ComplexMatrix y = m2(2, 1, 0, 1);
  const auto dual = pinv_ny(diag({1, 0}), y, fd);
  EXPECT_EQ(dual.method, Method::thm31_ny);
  EXPECT_TRUE(approx_eq(dual.z, m2(0.4, 0, 0.2, 0), Tolerance{1e-15}));
  EXPECT_TRUE(approx_eq(proj_rowspace_m2(diag({1, 0}), y, fd), m2(0.8, 0.4, 0.4, 0.2),
                        Tolerance{1e-15}));

  Rng rng(43);
  const ComplexMatrix n = test::random_rank(3, 4, 2, 10, rng);
  const auto f = svd(n);
  const ComplexMatrix id = ComplexMatrix::Identity(4, 4);
  EXPECT_TRUE(approx_eq(pinv_ny(n, id, f).z, pinv_oracle(n), Tolerance{1e-14}));
  EXPECT_TRUE(approx_eq<Complex>(proj_rowspace_m2(n, id, f), corange_projector(f),
                                 Tolerance{1e-14}));

  const ComplexMatrix sq = random_nonsingular(3, rng);
  const ComplexMatrix ys = random_nonsingular(3, rng);
  EXPECT_TRUE(approx_eq<Complex>(pinv_ny(sq, ys, svd(sq)).z, inverse(ys) * inverse(sq),
                                 Tolerance{1e-12}));

  const ComplexMatrix zero = ComplexMatrix::Zero(3, 4);
  EXPECT_EQ(proj_rowspace_m2(zero, random_nonsingular(4, rng), svd(zero)),
            ComplexMatrix::Zero(4, 4));
}

TEST(PinvNy, DualOfPinvXn) {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = generate(random_spec(rng, 10, 1e2, Flavor::a1a2));
    const ComplexMatrix& n = inst.n_matrix;
    const ComplexMatrix n_star = n.adjoint();
    const ComplexMatrix y_star = inst.y.adjoint();
    const ComplexMatrix direct = pinv_ny(n, inst.y, svd(n)).z;
    const ComplexMatrix via_dual = pinv_xn(y_star, n_star, svd(n_star)).z.adjoint();
    EXPECT_TRUE(approx_eq(direct, via_dual, Tolerance{1e-10})) << trial;
  }
}

TEST(PinvSides, MatchOracleAndProjectorForms) {
  Rng rng(45);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = generate(random_spec(rng, 16, 1e3, Flavor::a1a2));
    const ComplexMatrix& n = inst.n_matrix;
    const auto f = svd(n);
    const ComplexMatrix m1 = inst.x * n;
    const ComplexMatrix m2_ = n * inst.y;
    const auto xn = pinv_xn(inst.x, n, f);
    const auto ny = pinv_ny(n, inst.y, f);
    const ComplexMatrix p1 = proj_range_m1(inst.x, n, f);
    const ComplexMatrix p2 = proj_rowspace_m2(n, inst.y, f);
    SCOPED_TRACE(trial);

    EXPECT_TRUE(approx_eq(xn.z, test::reference_pinv(m1), Tolerance{1e-8}));
    EXPECT_TRUE(approx_eq(ny.z, test::reference_pinv(m2_), Tolerance{1e-8}));
    EXPECT_LE(xn.residuals.max(), 1e-9);
    EXPECT_LE(ny.residuals.max(), 1e-9);

    for (const ComplexMatrix* p : {&p1, &p2}) {
      EXPECT_LE((*p - p->adjoint()).norm(), 1e-10);
      EXPECT_LE((*p * *p - *p).norm(), 1e-10);
    }
    EXPECT_TRUE(approx_eq<Complex>(p1, m1 * xn.z, Tolerance{1e-9}));
    EXPECT_TRUE(approx_eq<Complex>(p2, ny.z * m2_, Tolerance{1e-9}));
    EXPECT_TRUE(approx_eq<Complex>(p1, m1 * pinv_oracle(m1), Tolerance{1e-9}));
    EXPECT_TRUE(approx_eq<Complex>(p2, pinv_oracle(m2_) * m2_, Tolerance{1e-9}));

    // The product shares its range with X N and its row space with N Y.
    const ComplexMatrix m = inst.x * n * inst.y;
    const ComplexMatrix mp = pinv_oracle(m);
    EXPECT_TRUE(approx_eq<Complex>(m * mp, p1, Tolerance{1e-9}));
    EXPECT_TRUE(approx_eq<Complex>(mp * m, p2, Tolerance{1e-9}));

    // X NN† X⁻¹ NN† (I + R*R)⁻¹(I + R*) is the range projector.
    const ComplexMatrix q = range_projector(f);
    const ComplexMatrix chain =
        inst.x * q * inverse(inst.x) * q * detail::right_correction(factor_r(inst.x, f));
    EXPECT_TRUE(approx_eq(chain, p1, Tolerance{1e-10}));
  }
}

TEST(PinvXny, Examples) {
  Rng rng(46);
  const ComplexMatrix n = test::random_rank(5, 4, 2, 10, rng);
  const auto f = svd(n);
  const ComplexMatrix ix = ComplexMatrix::Identity(5, 5);
  const ComplexMatrix iy = ComplexMatrix::Identity(4, 4);
  for (const auto& res : {pinv_xny(ix, n, iy, f), pinv_xny_hermitian(ix, n, iy, f),
                          pinv_xny_baseline(ix, n, iy, f)}) {
    EXPECT_TRUE(approx_eq(res.z, pinv_oracle(n), Tolerance{1e-14})) << to_string(res.method);
  }

  const ComplexMatrix sq = random_nonsingular(3, rng);
  const ComplexMatrix x = random_nonsingular(3, rng);
  const ComplexMatrix y = random_nonsingular(3, rng);
  EXPECT_TRUE(approx_eq<Complex>(pinv_xny(x, sq, y, svd(sq)).z,
                                 inverse(y) * inverse(sq) * inverse(x), Tolerance{1e-12}));

  const Instance inst = generate({.m = 5, .n = 4, .r = 2, .sigma_cond = 100,
                                  .flavor = Flavor::a1a2, .seed = 42});
  const auto res = pinv_xny(inst.x, inst.n_matrix, inst.y, svd(inst.n_matrix));
  EXPECT_EQ(res.method, Method::thm33);
  EXPECT_TRUE(res.hypotheses_hold());
  ASSERT_EQ(res.hypothesis_checks.size(), 2u);
  EXPECT_EQ(res.hypothesis_checks[0].name, "A1");
  EXPECT_EQ(res.hypothesis_checks[1].name, "A2");
  EXPECT_TRUE(approx_eq<Complex>(res.z, pinv_oracle<Complex>(inst.x * inst.n_matrix * inst.y),
                                 Tolerance{1e-8}));
}

TEST(PinvXny, MatchesOracleOnA1A2Corpus) {
  Rng rng(47);
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst = generate(random_spec(rng, 16, 1e3, Flavor::a1a2));
    while (test::composite_cond(inst.x * inst.n_matrix * inst.y) > 1e3) {
      inst = generate(random_spec(rng, 16, 1e3, Flavor::a1a2));
    }
    const ComplexMatrix m = inst.x * inst.n_matrix * inst.y;
    const auto res = pinv_xny(inst.x, inst.n_matrix, inst.y, svd(inst.n_matrix));
    SCOPED_TRACE(trial);
    EXPECT_TRUE(approx_eq(res.z, test::reference_pinv(m), Tolerance{1e-8}));
    EXPECT_LE(res.residuals.max(), 1e-9);
  }
}

TEST(PinvXny, AbsorptionIdentity) {
  Rng rng(48);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = generate(random_spec(rng, 12, 1e3, Flavor::a1a2));
    const auto f = svd(inst.n_matrix);
    const ComplexMatrix k = naive_inverse(inst.x, f, inst.y);
    const ComplexMatrix ix = ComplexMatrix::Identity(inst.x.rows(), inst.x.rows());
    const ComplexMatrix iy = ComplexMatrix::Identity(inst.y.rows(), inst.y.rows());
    const ComplexMatrix lhs = (iy + factor_l(inst.y, f)) * k * (ix + factor_r(inst.x, f));
    EXPECT_TRUE(approx_eq(lhs, k, Tolerance{1e-10})) << trial;
  }
}

TEST(PinvXny, StrictModeRejectsViolations) {
  Rng rng(49);
  const Instance a1 = generate({.m = 6, .n = 5, .r = 3, .sigma_cond = 10,
                                .flavor = Flavor::violate_a1, .seed = 3});
  const auto f1 = svd(a1.n_matrix);
  try {
    pinv_xny(a1.x, a1.n_matrix, a1.y, f1);
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.check(), "A1");
    EXPECT_NE(std::string(e.what()).find("off_block_norm="), std::string::npos);
  }
  EXPECT_THROW(pinv_xn(a1.x, a1.n_matrix, f1), HypothesisError);
  EXPECT_THROW(proj_range_m1(a1.x, a1.n_matrix, f1), HypothesisError);

  const Instance a2 = generate({.m = 6, .n = 5, .r = 3, .sigma_cond = 10,
                                .flavor = Flavor::violate_a2, .seed = 4});
  const auto f2 = svd(a2.n_matrix);
  try {
    pinv_xny(a2.x, a2.n_matrix, a2.y, f2);
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.check(), "A2");
  }
  EXPECT_THROW(pinv_ny(a2.n_matrix, a2.y, f2), HypothesisError);
  EXPECT_THROW(proj_rowspace_m2(a2.n_matrix, a2.y, f2), HypothesisError);

  const auto loose = pinv_xny(a2.x, a2.n_matrix, a2.y, f2, permissive());
  EXPECT_FALSE(loose.hypotheses_hold());
  EXPECT_TRUE(loose.hypothesis_checks[0].passed);
  EXPECT_FALSE(loose.hypothesis_checks[1].passed);
  EXPECT_GT(loose.hypothesis_checks[1].residual, 0.1);
}

TEST(PinvXny, NegativeControl) {
  Rng rng(50);
  int deviating = 0;
  int total = 0;
  while (total < 100) {
    InstanceSpec spec = random_spec(rng, 12, 1e2, Flavor::violate_a1);
    const Instance inst = generate(spec);
    if (inst.warning == InstanceWarning::violation_vacuous) continue;
    ++total;
    const auto rep = structure_report_x(inst.x, inst.n_svd_true);
    EXPECT_GE(rep.off_block_norm / inst.x.norm(), 0.1);
    const auto res = pinv_xny(inst.x, inst.n_matrix, inst.y, svd(inst.n_matrix), permissive());
    const ComplexMatrix oracle = pinv_oracle<Complex>(inst.x * inst.n_matrix * inst.y);
    if (!approx_eq(res.z, oracle, Tolerance{1e-6})) ++deviating;
  }
  EXPECT_GE(deviating, 95);
}

TEST(PinvXny, Errors) {
  Rng rng(51);
  const ComplexMatrix n = test::random_rank(3, 2, 1, 10, rng);
  const auto f = svd(n);
  const ComplexMatrix x = random_nonsingular(3, rng);
  const ComplexMatrix y = random_nonsingular(2, rng);
  EXPECT_THROW(pinv_xny(y, n, y, f), DimensionError);
  EXPECT_THROW(pinv_xny(x, n, x, f), DimensionError);
  EXPECT_THROW(pinv_xny<Complex>(x, n.topRows(2), y, f), DimensionError);

  // A singular X that still satisfies A1.
  ComplexMatrix xs = ComplexMatrix::Zero(3, 3);
  EXPECT_THROW(pinv_xny(xs, n, y, f, permissive()), SingularMatrixError);
  EXPECT_THROW(naive_inverse(xs, f, y), SingularMatrixError);
}

TEST(PinvXny, ResidualsCanBeSkipped) {
  const Instance inst = generate({.m = 4, .n = 4, .r = 2, .sigma_cond = 10,
                                  .flavor = Flavor::a1a2, .seed = 9});
  PinvOptions opts;
  opts.compute_residuals = false;
  const auto res = pinv_xny(inst.x, inst.n_matrix, inst.y, svd(inst.n_matrix), opts);
  EXPECT_EQ(res.residuals.max(), 0.0);
  EXPECT_LE(penrose_residuals<Complex>(inst.x * inst.n_matrix * inst.y, res.z).max(), 1e-9);
}

TEST(PinvXnyHermitian, MatchesOracleAndMainFormula) {
  Rng rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = generate(random_spec(rng, 12, 1e3, Flavor::hermitian_fix));
    const auto f = svd(inst.n_matrix);
    const ComplexMatrix m = inst.x * inst.n_matrix * inst.y;
    const auto res = pinv_xny_hermitian(inst.x, inst.n_matrix, inst.y, f);
    const auto main = pinv_xny(inst.x, inst.n_matrix, inst.y, f);
    SCOPED_TRACE(trial);
    EXPECT_EQ(res.method, Method::cor34);
    EXPECT_TRUE(res.hypotheses_hold());
    EXPECT_TRUE(approx_eq(res.z, test::reference_pinv(m), Tolerance{1e-8}));
    EXPECT_TRUE(approx_eq(res.z, main.z, Tolerance{1e-10}));
    EXPECT_LE(res.residuals.max(), 1e-9);
  }
}

TEST(PinvXnyHermitian, RejectsNonHermitianSide) {
  const Instance inst = generate({.m = 6, .n = 5, .r = 2, .sigma_cond = 10,
                                  .flavor = Flavor::a1a2, .seed = 5});
  const auto f = svd(inst.n_matrix);
  try {
    pinv_xny_hermitian(inst.x, inst.n_matrix, inst.y, f);
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.check(), "X E_N Hermitian");
  }
  const auto loose = pinv_xny_hermitian(inst.x, inst.n_matrix, inst.y, f, permissive());
  EXPECT_FALSE(loose.hypothesis_checks[0].passed);
  EXPECT_FALSE(loose.hypothesis_checks[1].passed);
}

TEST(PinvXnyBaseline, MatchesOracleAndMainFormula) {
  Rng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = generate(random_spec(rng, 12, 1e3, Flavor::projector_fix));
    const auto f = svd(inst.n_matrix);
    const ComplexMatrix m = inst.x * inst.n_matrix * inst.y;
    const auto res = pinv_xny_baseline(inst.x, inst.n_matrix, inst.y, f);
    const auto main = pinv_xny(inst.x, inst.n_matrix, inst.y, f);
    const auto herm = pinv_xny_hermitian(inst.x, inst.n_matrix, inst.y, f);
    SCOPED_TRACE(trial);
    EXPECT_EQ(res.method, Method::cgms11);
    EXPECT_TRUE(res.hypotheses_hold());
    EXPECT_TRUE(approx_eq(res.z, test::reference_pinv(m), Tolerance{1e-8}));
    EXPECT_TRUE(approx_eq(res.z, main.z, Tolerance{1e-9}));
    EXPECT_TRUE(approx_eq(res.z, herm.z, Tolerance{1e-9}));
  }
}

TEST(PinvXnyBaseline, RejectsUnfixedProjectors) {
  const Instance inst = generate({.m = 6, .n = 5, .r = 2, .sigma_cond = 10,
                                  .flavor = Flavor::hermitian_fix, .seed = 6});
  try {
    pinv_xny_baseline(inst.x, inst.n_matrix, inst.y, svd(inst.n_matrix));
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.check(), "X E_N = E_N");
  }
}

TEST(InnerInverse, Examples) {
  Rng rng(54);
  const ComplexMatrix a = test::random_rank(4, 5, 3, 10, rng);
  EXPECT_TRUE(inner_inverse_check(a, pinv_oracle(a), Tolerance{1e-12}));
  EXPECT_FALSE(inner_inverse_check<Complex>(ComplexMatrix::Identity(3, 3),
                                            ComplexMatrix::Zero(3, 3), Tolerance{1e-9}));
  EXPECT_THROW(inner_inverse_check(a, a, Tolerance{1e-9}), DimensionError);
}

TEST(InnerInverse, NaiveInverseWithoutStructure) {
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const Flavor flavor = trial % 2 == 0 ? Flavor::violate_a1 : Flavor::violate_a2;
    const Instance inst = generate(random_spec(rng, 12, 1e3, flavor));
    const auto f = svd(inst.n_matrix);
    const ComplexMatrix m = inst.x * inst.n_matrix * inst.y;
    EXPECT_TRUE(inner_inverse_check(m, naive_inverse(inst.x, f, inst.y), Tolerance{1e-9}))
        << trial;
  }
}

}  // namespace
}  // namespace mpx
