#include <gtest/gtest.h>

#include "gradalign/tensor.hpp"

using namespace gradalign;

TEST(Tensor, ShapeMustMatchData) {
  EXPECT_NO_THROW(Tensor({2, 3}, std::vector<double>(6, 0.0)));
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5, 0.0)), ShapeError);
  EXPECT_THROW(Tensor(std::vector<std::size_t>{3}, std::vector<double>{}), ShapeError);
}

TEST(Tensor, SignOfZeroIsZero) {
  EXPECT_EQ(sign(0.0), 0.0);
  EXPECT_EQ(sign(-0.0), 0.0);
  EXPECT_EQ(sign(1e-300), 1.0);
  EXPECT_EQ(sign(-3.0), -1.0);
}

TEST(Tensor, ArgmaxBreaksTiesByLowestIndex) {
  EXPECT_EQ(argmax(Tensor{1.0, 3.0, 3.0}), 1u);
  EXPECT_EQ(argmax(Tensor{5.0, 5.0, 1.0}, 0), 1u);
  EXPECT_EQ(argmax(Tensor{9.0, 1.0, 1.0}, 0), 1u);
}

TEST(Tensor, Norms) {
  const Tensor t{3.0, -4.0};
  EXPECT_DOUBLE_EQ(norm_l1(t), 7.0);
  EXPECT_DOUBLE_EQ(norm_l2(t), 5.0);
  EXPECT_DOUBLE_EQ(norm_linf(t), 4.0);
  EXPECT_THROW(dot(t, Tensor{1.0}), ShapeError);
}
