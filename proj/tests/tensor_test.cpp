#include <gtest/gtest.h>

#include <cmath>

#include "sparseout/errors.hpp"
#include "sparseout/tensor.hpp"
#include "test_util.hpp"

namespace sparseout {
namespace {

using testing::naive_matmul;
using testing::random_tensor;

TEST(TensorTest, ConstructorRejectsWrongLength) {
  EXPECT_THROW(Tensor(2, 3, std::vector<double>(5)), DimensionError);
  EXPECT_NO_THROW(Tensor(2, 3, std::vector<double>(6)));
}

TEST(TensorTest, MatmulIdentity) {
  const Tensor m = Tensor::from_rows({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(Tensor::identity(2), m), m);
}

TEST(TensorTest, MatmulExact) {
  EXPECT_EQ(matmul(Tensor::from_rows({{1, 2}}), Tensor::from_rows({{3}, {4}})),
            Tensor::from_rows({{11}}));
}

TEST(TensorTest, MatmulShapeErrorNamesBothShapes) {
  try {
    matmul(Tensor(2, 3), Tensor(2, 3));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(2 x 3) * (2 x 3)"), std::string::npos) << msg;
  }
}

TEST(TensorTest, MatmulMatchesTripleLoop) {
  Rng rng(42);
  const Tensor a = random_tensor(5, 4, rng);
  const Tensor b = random_tensor(4, 3, rng);
  const Tensor got = matmul(a, b);
  const Tensor want = naive_matmul(a, b);
  ASSERT_TRUE(got.same_shape(want));
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-15);
}

TEST(TensorTest, AllProductKernelsAgreeWithOracleUpTo32) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.below(32), k = 1 + rng.below(32), n = 1 + rng.below(32);
    const Tensor a = random_tensor(m, k, rng, -3, 3);
    const Tensor b = random_tensor(k, n, rng, -3, 3);
    const Tensor want = naive_matmul(a, b);
    const Tensor variants[] = {matmul(a, b), matmul_nt(a, transpose(b)),
                               matmul_tn(transpose(a), b)};
    for (const Tensor& got : variants) {
      ASSERT_TRUE(got.same_shape(want));
      for (std::size_t i = 0; i < got.size(); ++i) {
        const double scale = std::max(1.0, std::fabs(want[i]));
        EXPECT_LE(std::fabs(got[i] - want[i]) / scale, 1e-12);
      }
    }
  }
}

TEST(TensorTest, ElementwiseExamples) {
  EXPECT_EQ(abs(Tensor::from_rows({{-2, 3}})), Tensor::from_rows({{2, 3}}));
  EXPECT_EQ(pow(Tensor::from_rows({{4}}), 0.5), Tensor::from_rows({{2}}));
  EXPECT_EQ(sign(Tensor::from_rows({{-5, 0, 7}})), Tensor::from_rows({{-1, 0, 1}}));
  EXPECT_EQ(add(Tensor::from_rows({{1, 2}}), Tensor::from_rows({{3, 4}})),
            Tensor::from_rows({{4, 6}}));
  EXPECT_EQ(sub(Tensor::from_rows({{1, 2}}), Tensor::from_rows({{3, 4}})),
            Tensor::from_rows({{-2, -2}}));
  EXPECT_EQ(hadamard(Tensor::from_rows({{1, 2}}), Tensor::from_rows({{3, 4}})),
            Tensor::from_rows({{3, 8}}));
}

TEST(TensorTest, BinaryOpsRejectShapeMismatch) {
  EXPECT_THROW(add(Tensor(1, 2), Tensor(2, 1)), DimensionError);
  EXPECT_THROW(sub(Tensor(1, 2), Tensor(1, 3)), DimensionError);
  EXPECT_THROW(hadamard(Tensor(3, 2), Tensor(2, 3)), DimensionError);
}

TEST(TensorTest, PowRejectsNegativeBaseWithFractionalExponent) {
  EXPECT_THROW(pow(Tensor::from_rows({{-4}}), 0.5), InvalidInputError);
  EXPECT_EQ(pow(Tensor::from_rows({{-2}}), 2.0), Tensor::from_rows({{4}}));
}

TEST(TensorTest, RowBroadcastAndReductions) {
  const Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
  EXPECT_EQ(add_row_vector(a, Tensor::from_rows({{10, 20}})),
            Tensor::from_rows({{11, 22}, {13, 24}}));
  EXPECT_THROW(add_row_vector(a, Tensor(1, 3)), DimensionError);
  EXPECT_EQ(sum_rows(a), Tensor::from_rows({{4, 6}}));
  const std::size_t idx[] = {1, 0, 1};
  EXPECT_EQ(gather_rows(a, idx), Tensor::from_rows({{3, 4}, {1, 2}, {3, 4}}));
  EXPECT_EQ(slice_rows(a, 1, 2), Tensor::from_rows({{3, 4}}));
}

TEST(TensorTest, BitwiseEqualDistinguishesSignedZero) {
  EXPECT_TRUE(Tensor::from_rows({{0.0}}) == Tensor::from_rows({{-0.0}}));
  EXPECT_FALSE(bitwise_equal(Tensor::from_rows({{0.0}}), Tensor::from_rows({{-0.0}})));
}

TEST(TensorTest, OperationsStayFinite) {
  Rng rng(3);
  const Tensor a = random_tensor(8, 8, rng, -10, 10);
  EXPECT_TRUE(all_finite(matmul(a, a)));
  EXPECT_TRUE(all_finite(pow(abs(a), 0.75)));
  EXPECT_TRUE(all_finite(sign(a)));
}

}  // namespace
}  // namespace sparseout
