#include <stdexcept>

#include <gtest/gtest.h>

#include "decoyqkd/error_pattern.hpp"
#include "decoyqkd/errors.hpp"

using namespace decoyqkd;

TEST(ErrorPattern, TwoBlockStrengthenedThenWeakened) {
  const auto p = ErrorPattern::two_block({0.2, 0.6}, 0.10, 1000, 4000);
  EXPECT_NEAR(p.intensity(0).decoy, 0.22, 1e-15);
  EXPECT_NEAR(p.intensity(0).signal, 0.66, 1e-15);
  EXPECT_NEAR(p.intensity(999).signal, 0.66, 1e-15);
  EXPECT_NEAR(p.intensity(1000).decoy, 0.18, 1e-15);
  EXPECT_NEAR(p.intensity(1000).signal, 0.54, 1e-15);
  EXPECT_NEAR(p.intensity(2000).signal, 0.66, 1e-15);
  EXPECT_TRUE(p.is_strengthened(5));
  EXPECT_FALSE(p.is_strengthened(1500));
  const auto bs = p.block_structure();
  ASSERT_TRUE(bs);
  EXPECT_EQ(bs->block_length, 1000u);
  EXPECT_EQ(bs->period, 2u);
}

TEST(ErrorPattern, ExactIsConstant) {
  const auto p = ErrorPattern::exact({0.2, 0.6}, 100);
  for (std::uint64_t i : {0ull, 17ull, 99ull}) {
    EXPECT_EQ(p.intensity(i).decoy, 0.2);
    EXPECT_EQ(p.intensity(i).signal, 0.6);
  }
  EXPECT_THROW(p.intensity(100), std::out_of_range);
}

TEST(ErrorPattern, PerPulseAndCustom) {
  const auto list = ErrorPattern::per_pulse({{0.2, 0.6}, {0.21, 0.59}});
  EXPECT_EQ(list.pulse_count(), 2u);
  EXPECT_EQ(list.intensity(1).decoy, 0.21);
  EXPECT_FALSE(list.block_structure());
  const auto custom = ErrorPattern::custom({0.2, 0.6}, 10, [](std::uint64_t i) {
    return IntensityPair{0.2 + 0.001 * static_cast<double>(i), 0.6};
  });
  EXPECT_NEAR(custom.intensity(3).decoy, 0.203, 1e-15);
  EXPECT_EQ(pattern_intensity(custom, 3).signal, 0.6);
}

TEST(ErrorPattern, ValidateAgainstWindows) {
  const auto p = ErrorPattern::two_block({0.2, 0.6}, 0.05, 10, 40);
  EXPECT_NO_THROW(p.validate_against(CoherentWindow::relative(0.2, 0.05),
                                     CoherentWindow::relative(0.6, 0.05)));
  EXPECT_THROW(p.validate_against(CoherentWindow::relative(0.2, 0.04),
                                  CoherentWindow::relative(0.6, 0.05)),
               InvalidInput);
}

TEST(ErrorPattern, RejectsBadTwoBlockParameters) {
  EXPECT_THROW(ErrorPattern::two_block({0.2, 0.6}, 1.0, 10, 40), InvalidInput);
  EXPECT_THROW(ErrorPattern::two_block({0.2, 0.6}, 0.1, 0, 40), InvalidInput);
}
