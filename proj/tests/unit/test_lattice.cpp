#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "latfuse/catalog.hpp"
#include "latfuse/decimal.hpp"
#include "latfuse/errors.hpp"
#include "latfuse/io.hpp"
#include "latfuse/lattice.hpp"
#include "oracles.hpp"

namespace latfuse {
namespace {

GeneratorMatrix hexagonal() {
  Matrix m(2, 2);
  m << 1, 0, -0.5, std::sqrt(3.0) / 2;
  return GeneratorMatrix(m);
}

TEST(Gram, Identity) {
  EXPECT_TRUE(gram(GeneratorMatrix::identity(2)).isApprox(Matrix::Identity(2, 2)));
}

TEST(Gram, Hexagonal) {
  Matrix expected(2, 2);
  expected << 1, -0.5, -0.5, 1;
  EXPECT_LT((gram(hexagonal()) - expected).norm(), 1e-15);
}

TEST(Gram, ScaledIdentity) {
  const auto g = GeneratorMatrix(2.0 * Matrix::Identity(3, 3));
  EXPECT_EQ(gram(g), 4.0 * Matrix::Identity(3, 3));
}

TEST(Volume, Examples) {
  EXPECT_DOUBLE_EQ(volume(GeneratorMatrix::identity(5)), 1.0);
  EXPECT_NEAR(volume(GeneratorMatrix(1.5 * Matrix::Identity(4, 4))), std::pow(1.5, 4), 1e-14);
  EXPECT_NEAR(volume(hexagonal()), std::sqrt(3.0) / 2, 1e-15);
}

TEST(Volume, SingularThrows) {
  Matrix m(2, 2);
  m << 1, 2, 2, 4;
  EXPECT_THROW(GeneratorMatrix{m}, DegenerateLatticeError);
  EXPECT_THROW(volume(m), DegenerateLatticeError);
  Matrix tiny = 1e-7 * Matrix::Identity(2, 2);
  EXPECT_THROW(volume(tiny), DegenerateLatticeError);
}

TEST(Volume, NonFiniteThrows) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = std::nan("");
  EXPECT_THROW(GeneratorMatrix{m}, DegenerateLatticeError);
}

TEST(Scale, Examples) {
  const auto s = scale(GeneratorMatrix::identity(2), 3.0);
  EXPECT_EQ(s.rows(), 3.0 * Matrix::Identity(2, 2));
  EXPECT_NEAR(s.volume(), 9.0, 1e-14);
  EXPECT_EQ(scale(hexagonal(), 1.0).rows(), hexagonal().rows());
  EXPECT_NEAR(scale(hexagonal(), 2.0).volume(), 2 * std::sqrt(3.0), 1e-14);
}

TEST(Scale, RejectsNonPositive) {
  EXPECT_THROW(scale(hexagonal(), 0.0), std::invalid_argument);
  EXPECT_THROW(scale(hexagonal(), -1.0), std::invalid_argument);
}

TEST(Scale, VolumeLawOnRandomInputs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.5, 2.0);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 8;
    const GeneratorMatrix g(testing::random_matrix(n, n, rng));
    const double a = ua(rng);
    EXPECT_NEAR(scale(g, a).volume() / (std::pow(a, n) * g.volume()), 1.0, 1e-12);
  }
}

TEST(DirectSum, Examples) {
  const auto one = GeneratorMatrix::identity(1);
  EXPECT_EQ(direct_sum(one, one).rows(), Matrix::Identity(2, 2));
  const auto s = direct_sum(hexagonal(), one);
  EXPECT_EQ(s.dim(), 3);
  EXPECT_NEAR(s.volume(), std::sqrt(3.0) / 2, 1e-15);
  EXPECT_EQ(s(0, 2), 0.0);
  EXPECT_EQ(s(2, 0), 0.0);
}

TEST(DirectSum, VolumeMultiplicative) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const GeneratorMatrix a(testing::random_matrix(3, 3, rng));
    const GeneratorMatrix b(testing::random_matrix(4, 4, rng));
    EXPECT_NEAR(direct_sum(a, b).volume() / (a.volume() * b.volume()), 1.0, 1e-12);
  }
}

TEST(Dual, VolumeIsReciprocal) {
  const auto d = dual(hexagonal());
  EXPECT_NEAR(d.volume() * hexagonal().volume(), 1.0, 1e-14);
  // Inner products between primal and dual bases are the identity.
  EXPECT_LT((hexagonal().rows() * d.rows().transpose() - Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(VolumePower, ExactUnderDoubling) {
  for (int n : {1, 2, 3, 12, 13, 22}) {
    for (double v : {0.37, 1.0, 27.0, 1e-3}) {
      EXPECT_EQ(volume_power(std::ldexp(v, n), n), 4.0 * volume_power(v, n)) << n << " " << v;
    }
  }
}

TEST(Catalog, ContainsRequiredFamilies) {
  const auto& cat = Catalog::builtin();
  for (const char* name : {"A2", "A3", "A3s", "D4", "D5s", "E6", "E6s", "E7", "E8", "K12", "L16"}) {
    EXPECT_TRUE(cat.contains(name)) << name;
  }
  EXPECT_TRUE(cat.contains("Z"));
  EXPECT_TRUE(cat.contains("Z7"));
}

TEST(Catalog, Z1) {
  const auto z = catalog_get("Z1");
  EXPECT_EQ(z.dim(), 1);
  EXPECT_EQ(z.generator(0, 0), 1.0);
  ASSERT_TRUE(z.reference_nsm);
  EXPECT_DOUBLE_EQ(*z.reference_nsm, 1.0 / 12.0);
  EXPECT_EQ(catalog_get("Z").dim(), 1);
  EXPECT_EQ(catalog_get("Z13").generator.rows(), Matrix::Identity(13, 13));
}

TEST(Catalog, K12Determinant) {
  const auto k = catalog_get("K12");
  EXPECT_EQ(k.dim(), 12);
  EXPECT_NEAR(k.generator.volume(), 27.0, 1e-9);
  EXPECT_NEAR(gram(k.generator).determinant(), 729.0, 1e-6);
}

TEST(Catalog, L16Determinant) {
  const auto l = catalog_get("L16");
  EXPECT_EQ(l.dim(), 16);
  EXPECT_NEAR(gram(l.generator).determinant(), 256.0, 1e-6);
}

TEST(Catalog, UnknownNameListsAvailable) {
  try {
    catalog_get("Q7");
    FAIL() << "expected UnknownLatticeError";
  } catch (const UnknownLatticeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("Q7"), std::string::npos);
    EXPECT_NE(msg.find("K12"), std::string::npos);
    EXPECT_NE(msg.find("E8"), std::string::npos);
  }
  EXPECT_THROW(catalog_get("Z0"), UnknownLatticeError);
}

TEST(Catalog, EntriesAreValid) {
  for (const auto& rec : Catalog::builtin().entries()) {
    SCOPED_TRACE(rec.name);
    EXPECT_NEAR(rec.generator.volume() / rec.reference_volume, 1.0, 1e-9);
    const Matrix g = gram(rec.generator);
    EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-14 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    EXPECT_EQ(Eigen::LLT<Matrix>(g).info(), Eigen::Success);
    ASSERT_TRUE(rec.reference_nsm);
    EXPECT_GT(*rec.reference_nsm, 0.06);
    EXPECT_LT(*rec.reference_nsm, 1.0 / 12.0);
  }
}

TEST(Catalog, DualsAreInverseTranspose) {
  const auto& cat = Catalog::builtin();
  for (const auto& rec : cat.entries()) {
    if (!rec.dual_of) continue;
    const auto primal = cat.get(*rec.dual_of);
    EXPECT_NEAR(rec.generator.volume() * primal.generator.volume(), 1.0, 1e-12) << rec.name;
  }
}

TEST(Catalog, IntegerGramMatricesForPrimals) {
  for (const auto& rec : Catalog::builtin().entries()) {
    if (rec.dual_of) continue;
    const Matrix g = gram(rec.generator);
    EXPECT_LT((g - g.array().round().matrix()).cwiseAbs().maxCoeff(), 1e-12) << rec.name;
  }
}

TEST(Catalog, DirectSumVolumesForAllPairs) {
  const auto& entries = Catalog::builtin().entries();
  for (std::size_t i = 0; i < entries.size(); i += 3) {
    for (std::size_t j = 0; j < entries.size(); j += 5) {
      const auto s = direct_sum(entries[i].generator, entries[j].generator);
      EXPECT_NEAR(s.volume() / (entries[i].reference_volume * entries[j].reference_volume), 1.0, 1e-9);
    }
  }
}

TEST(Catalog, JsonRoundTripIsExact) {
  const auto& cat = Catalog::builtin();
  const std::string once = cat.to_json();
  const std::string twice = Catalog::from_json(once).to_json();
  EXPECT_EQ(once, twice);
  const auto back = Catalog::from_json(once);
  for (const auto& rec : cat.entries()) {
    const auto r = back.get(rec.name);
    EXPECT_EQ(r.generator.rows(), rec.generator.rows()) << rec.name;
    EXPECT_EQ(r.reference_nsm, rec.reference_nsm);
  }
}

TEST(Catalog, RejectsBadDocuments) {
  EXPECT_THROW(Catalog::from_json("{"), FormatError);
  EXPECT_THROW(Catalog::from_json(R"({"format": "other", "version": 1, "lattices": []})"), FormatError);
  EXPECT_THROW(Catalog::from_json(R"({"format": "latfuse-catalog", "version": 9, "lattices": []})"),
               FormatError);
  // Volume disagrees with the generator.
  EXPECT_THROW(Catalog::from_json(R"({"format": "latfuse-catalog", "version": 1, "lattices": [
      {"name": "X", "dim": 1, "rows": [["2"]], "reference_volume": "1"}]})"),
               FormatError);
  EXPECT_THROW(Catalog::from_json(R"({"format": "latfuse-catalog", "version": 1, "lattices": [
      {"name": "X", "dim": 2, "rows": [["1", "0"]], "reference_volume": "1"}]})"),
               FormatError);
  EXPECT_THROW(Catalog::from_json(R"({"format": "latfuse-catalog", "version": 1, "lattices": [
      {"name": "X", "dim": 1, "rows": [["abc"]]}]})"),
               FormatError);
  EXPECT_THROW(Catalog::from_json(R"({"format": "latfuse-catalog", "version": 1, "lattices": [
      {"name": "X", "dim": 2, "rows": [["1", "2"], ["2", "4"]]}]})"),
               DegenerateLatticeError);
}

TEST(LatticeFile, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "latfuse_test_roundtrip.json";
  auto rec = make_record("hex", hexagonal(), 0.0801875, "test lattice");
  write_lattice_file(path, rec);
  const auto back = read_lattice_file(path);
  EXPECT_EQ(back.name, "hex");
  EXPECT_EQ(back.generator.rows(), rec.generator.rows());
  EXPECT_EQ(back.reference_nsm, rec.reference_nsm);
  EXPECT_EQ(back.note, "test lattice");
  // Rewriting a read file reproduces it byte for byte.
  const auto text = read_file(path);
  write_lattice_file(path, back);
  EXPECT_EQ(read_file(path), text);
  std::filesystem::remove(path);
}

TEST(LatticeFile, MissingFile) {
  EXPECT_THROW(read_lattice_file("/nonexistent/latfuse.json"), Error);
}

TEST(Decimal, ShortestRoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 1000; ++i) {
    const double v = nd(rng) * std::pow(10.0, i % 20 - 10);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_THROW(parse_double("1.5x"), FormatError);
  EXPECT_THROW(parse_double(""), FormatError);
}

}  // namespace
}  // namespace latfuse
