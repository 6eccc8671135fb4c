#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "latfuse/errors.hpp"
#include "latfuse/fusion.hpp"
#include "latfuse/nsm.hpp"

namespace latfuse {
namespace {

FusionSpec spec_with_ratio(const char* big, const char* small, double ratio) {
  FusionSpec s;
  s.components = {{catalog_get(big), 1}, {catalog_get(small), 1}};
  s.scalings = {1.0, ratio};
  return s;
}

TEST(ParseComponents, Examples) {
  const auto c = parse_components("K12,Z");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].lattice.name, "K12");
  EXPECT_EQ(c[1].lattice.dim(), 1);
  const auto m = parse_components("L16, A2*2");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[1].multiplicity, 2);
  EXPECT_EQ(parse_components("Z*3")[0].multiplicity, 3);
}

TEST(ParseComponents, Errors) {
  EXPECT_THROW(parse_components(""), std::invalid_argument);
  EXPECT_THROW(parse_components("K12,,Z"), std::invalid_argument);
  EXPECT_THROW(parse_components("Z*0"), std::invalid_argument);
  EXPECT_THROW(parse_components("Z*x"), std::invalid_argument);
  EXPECT_THROW(parse_components("K12,Q9"), UnknownLatticeError);
}

TEST(FusionSpec, LabelBlocksAndDim) {
  const auto s = make_optimal_spec(parse_components("L16,A2*2,Z"));
  EXPECT_EQ(s.label(), "L16,A2*2,Z");
  EXPECT_EQ(s.total_dim(), 21);
  const std::vector<Block> expected{{0, 16}, {16, 2}, {18, 2}, {20, 1}};
  EXPECT_EQ(s.blocks(), expected);
  EXPECT_EQ(s.expanded().size(), 4u);
}

TEST(FusionSpec, ValidateRejectsBadScalings) {
  auto s = make_optimal_spec(parse_components("A2,Z"));
  s.scalings[1] = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.scalings.pop_back();
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(OptimalScaling, IdenticalComponentsShareScale) {
  const auto a = optimal_scaling({catalog_get("D4"), catalog_get("D4"), catalog_get("D4")});
  EXPECT_EQ(a, std::vector<double>(3, 1.0));
}

TEST(OptimalScaling, K12WithZ) {
  const auto k = catalog_get("K12");
  const auto a = optimal_scaling({k, catalog_get("Z")});
  EXPECT_EQ(a[0], 1.0);
  const double expected =
      std::sqrt(*k.reference_nsm) * std::pow(k.reference_volume, 1.0 / 12) / std::sqrt(1.0 / 12);
  EXPECT_NEAR(a[1], expected, 1e-14 * expected);
  // K12 at minimal norm 4 has V = 27, so V^{1/12} = 3^{1/4}.
  EXPECT_NEAR(a[1], std::sqrt(12 * *k.reference_nsm) * std::pow(3.0, 0.25), 1e-13);
}

TEST(OptimalScaling, AnchorsLargestComponent) {
  const auto a = optimal_scaling({catalog_get("Z"), catalog_get("L16"), catalog_get("A2")});
  EXPECT_EQ(a[1], 1.0);
  EXPECT_NE(a[0], 1.0);
  const auto b = optimal_scaling({catalog_get("Z"), catalog_get("A2")}, 0);
  EXPECT_EQ(b[0], 1.0);
}

TEST(OptimalScaling, EqualizesPerDimensionDistortion) {
  // At the optimum every component contributes G_i (a_i^n_i V_i)^{2/n_i}
  // per dimension, and these are all equal.
  const std::vector<LatticeRecord> parts{catalog_get("K12"), catalog_get("A2"), catalog_get("Z")};
  const auto a = optimal_scaling(parts);
  std::vector<double> per_dim;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const int n = parts[i].dim();
    per_dim.push_back(*parts[i].reference_nsm *
                      std::pow(std::pow(a[i], n) * parts[i].reference_volume, 2.0 / n));
  }
  EXPECT_NEAR(per_dim[1] / per_dim[0], 1.0, 1e-13);
  EXPECT_NEAR(per_dim[2] / per_dim[0], 1.0, 1e-13);
}

TEST(OptimalScaling, MissingNsmThrows) {
  auto r = make_record("X", GeneratorMatrix::identity(2));
  EXPECT_THROW(optimal_scaling({catalog_get("A2"), r}), Error);
  EXPECT_THROW(predicted_product_nsm({r}), Error);
}

TEST(PredictedNsm, Examples) {
  const auto k = catalog_get("K12");
  EXPECT_DOUBLE_EQ(predicted_product_nsm({k}), *k.reference_nsm);
  EXPECT_NEAR(predicted_product_nsm({catalog_get("Z"), catalog_get("Z")}), 1.0 / 12, 1e-17);
  const double p = predicted_product_nsm({k, catalog_get("Z")});
  EXPECT_NEAR(p, std::pow(*k.reference_nsm, 12.0 / 13) * std::pow(1.0 / 12, 1.0 / 13), 1e-16);
  EXPECT_NEAR(p, 0.07103, 5e-5);
}

TEST(PredictedNsm, ReorderInvariant) {
  const auto a = catalog_get("L16"), b = catalog_get("A2"), c = catalog_get("Z"), d = catalog_get("D4");
  const double p = predicted_product_nsm({a, b, c, d});
  EXPECT_NEAR(predicted_product_nsm({c, a, d, b}), p, 1e-16);
  EXPECT_NEAR(predicted_product_nsm({d, c, b, a}), p, 1e-16);
}

TEST(BuildProduct, CubicIsIdentity) {
  FusionSpec s;
  s.components = {{catalog_get("Z"), 13}};
  s.scalings = {1.0};
  EXPECT_EQ(build_product(s).rows(), Matrix::Identity(13, 13));
}

TEST(BuildProduct, K12WithZ) {
  const auto s = make_optimal_spec(parse_components("K12,Z"));
  const auto g = build_product(s);
  EXPECT_EQ(g.dim(), 13);
  EXPECT_NEAR(g.volume(), s.scalings[1] * 27.0, 1e-9);
  EXPECT_EQ(g(12, 12), s.scalings[1]);
  EXPECT_TRUE(g.rows().block(0, 12, 12, 1).isZero());
  EXPECT_TRUE(g.rows().block(12, 0, 1, 12).isZero());
}

TEST(BuildProduct, ZWithZIsScaledIdentity) {
  const auto g = build_product(make_optimal_spec(parse_components("Z,Z")));
  EXPECT_EQ(g.rows(), Matrix::Identity(2, 2));
}

TEST(BuildProduct, EstimateMatchesPrediction) {
  const auto s = make_optimal_spec(parse_components("D4,A2"));
  const auto e = estimate_nsm(build_product(s), 60000, 8);
  const double p = predicted_product_nsm(s.expanded());
  double ref_var = 0.0;
  for (const auto& c : s.expanded()) ref_var += std::pow(*c.reference_nsm_std, 2);
  EXPECT_LE(std::abs(e.mean - p), 3 * std::sqrt(e.var_of_mean + ref_var));
}

// Common random numbers: every ratio sees the same unit-cube stream, so the
// comparison is far sharper than the marginal sigmas suggest.
void check_local_optimum(const char* big, const char* small) {
  const auto opt = make_optimal_spec(parse_components(std::string(big) + "," + small));
  const double r = opt.scalings[1];
  const auto at = [&](double ratio) {
    return estimate_nsm(build_product(spec_with_ratio(big, small, ratio)), 100000, 2024);
  };
  const auto centre = at(r);
  for (double f : {0.9, 1.1}) {
    const auto off = at(r * f);
    EXPECT_GE(off.mean, centre.mean - 2 * centre.std_of_mean()) << big << "," << small << " x" << f;
  }
}

TEST(LocalOptimality, A2WithZ) { check_local_optimum("A2", "Z"); }
TEST(LocalOptimality, D4WithZ) { check_local_optimum("D4", "Z"); }

}  // namespace
}  // namespace latfuse
