#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "decoyqkd/errors.hpp"
#include "decoyqkd/key_rate.hpp"

using namespace decoyqkd;

namespace {

ObservedRates table_rates() {
  const double sum = 0.50269 + 0.40726 + 0.09006;
  ObservedRates r;
  r.S = 1.548e-4;
  r.S_prime = 3.817e-4;
  r.S0 = 2.609e-5;
  r.p_prime = 0.50269 / sum;
  r.p = 0.40726 / sum;
  r.p0 = 0.09006 / sum;
  r.M = 4e6 * 1481.2;
  r.qber_signal = 0.04247;
  r.qber_decoy = 0.08379;
  return r;
}

SweepSettings table_settings(QberConvention c) {
  SweepSettings s;
  s.repetition_rate = 4e6;
  s.convention = c;
  return s;
}

const std::vector<double> kDeltas{0.0, 0.01, 0.02, 0.03, 0.04, 0.05};

}  // namespace

TEST(BinaryEntropy, Values) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_NEAR(binary_entropy(0.04247), 0.253504633739007, 1e-14);
  EXPECT_THROW(binary_entropy(-0.1), InvalidInput);
  EXPECT_THROW(binary_entropy(1.1), InvalidInput);
}

TEST(BinaryEntropy, Symmetric) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_NEAR(binary_entropy(x), binary_entropy(1.0 - x), 1e-14);
  }
}

TEST(KeyRate, PerCount) {
  EXPECT_DOUBLE_EQ(key_rate_per_count(1.0, 0.0, 0.0), 1.0);
  EXPECT_NEAR(key_rate_per_count(0.0, 0.3, 0.04247), -binary_entropy(0.04247), 1e-15);
  EXPECT_NEAR(key_rate_per_count(0.5733, 0.0740798883656027, 0.04247), 0.101386542692624, 1e-12);
  EXPECT_NEAR(key_rate_per_count(0.5733, 0.0413636553609394, 0.04247), 0.177324617716144, 1e-12);
  EXPECT_THROW(key_rate_per_count(0.5, 0.1, 0.1, 0.9), InvalidInput);
}

TEST(SinglePhotonQber, Conventions) {
  EXPECT_NEAR(single_photon_qber(0.04247, 0.5733, 3.817e-4, std::exp(-0.6), 2.609e-5,
                                 QberConvention::CaptionRatio),
              0.0740798883656027, 1e-13);
  EXPECT_NEAR(single_photon_qber(0.04247, 0.5733, 3.817e-4, std::exp(-0.6), 2.609e-5,
                                 QberConvention::DarkCountCorrected),
              0.0413636553609394, 1e-13);
  EXPECT_EQ(single_photon_qber(0.0, 0.3, 3.817e-4, 0.5, 0.0, QberConvention::CaptionRatio), 0.0);
  EXPECT_EQ(single_photon_qber(0.3, 0.2, 3.817e-4, 0.5, 0.0, QberConvention::CaptionRatio), 0.5);
  EXPECT_THROW(single_photon_qber(0.1, 0.0, 1e-3, 0.5, 0.0, QberConvention::CaptionRatio),
               InvalidInput);
}

TEST(KeyRate, Hertz) {
  auto r = table_rates();
  r.p_prime = 0.50269;
  EXPECT_NEAR(key_rate_hz(0.1013, r, 4e6), 77.7484684, 1e-6);
  EXPECT_EQ(key_rate_hz(0.0, r, 4e6), 0.0);
}

TEST(Sweep, TableDarkCorrected) {
  const auto rows = sweep_delta_m(table_rates(), kDeltas,
                                  table_settings(QberConvention::DarkCountCorrected));
  const double expected[] = {136.08, 123.36, 110.47, 97.39, 84.10, 70.59};
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(rows[i].R_hz, expected[i], 0.006) << i;
    EXPECT_EQ(rows[i].status, RowStatus::Ok);
  }
  for (std::size_t i = 1; i < 6; ++i) {
    EXPECT_LT(rows[i].delta1_signal, rows[i - 1].delta1_signal);
  }
}

TEST(Sweep, TableCaptionConvention) {
  const auto rows = sweep_delta_m(table_rates(), {0.0}, table_settings(QberConvention::CaptionRatio));
  EXPECT_NEAR(rows[0].R_hz, 77.8, 0.05);
}

TEST(Sweep, ZeroDeltaEqualsErrorFreeRow) {
  const auto s = table_settings(QberConvention::DarkCountCorrected);
  const auto rows = sweep_delta_m(table_rates(), {0.0}, s);
  const auto ef = errorfree_row(table_rates(), s);
  EXPECT_NEAR(rows[0].delta1_signal, ef.delta1_signal, 1e-12);
  EXPECT_NEAR(rows[0].R_hz, ef.R_hz, 1e-9);
}

TEST(Sweep, OrderingFailureGivesNanRow) {
  auto s = table_settings(QberConvention::DarkCountCorrected);
  s.nominal = {0.45, 0.5};
  const auto rows = sweep_delta_m(table_rates(), {0.0, 0.1}, s);
  EXPECT_NE(rows[0].status, RowStatus::PreconditionFailed);
  EXPECT_EQ(rows[1].status, RowStatus::PreconditionFailed);
  EXPECT_TRUE(std::isnan(rows[1].R_hz));
  EXPECT_TRUE(rows[1].insecure());
}

TEST(Csv, RoundTripsToSixDigits) {
  const auto rows = sweep_delta_m(table_rates(), kDeltas,
                                  table_settings(QberConvention::DarkCountCorrected));
  const std::string text = sweep_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "delta_m,delta1_signal,delta1_decoy,t1,R_per_count,R_hz");
  const auto back = parse_sweep_csv(text);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(back[i].R_hz, rows[i].R_hz, 5e-6 * std::abs(rows[i].R_hz));
    EXPECT_NEAR(back[i].t1, rows[i].t1, 5e-6 * rows[i].t1);
    EXPECT_NEAR(back[i].delta1_signal, rows[i].delta1_signal, 5e-6 * rows[i].delta1_signal);
  }
  EXPECT_EQ(sweep_csv(back), text);
}

TEST(Csv, GoldenFirstRow) {
  const auto rows = sweep_delta_m(table_rates(), {0.0},
                                  table_settings(QberConvention::DarkCountCorrected));
  const std::string text = sweep_csv(rows);
  EXPECT_EQ(text.substr(text.find('\n') + 1), "0,0.57328,0.702934,0.0413651,0.177306,136.082\n");
}

TEST(Csv, MalformedInputNamesTheLine) {
  try {
    parse_sweep_csv("delta_m,delta1_signal,delta1_decoy,t1,R_per_count,R_hz\n0,1,2\n");
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Table, MarksInsecureRows) {
  auto r = table_rates();
  r.S_prime = 2.0e-5;  // below the vacuum-source rate
  r.S = 2.2e-5;
  const auto rows = sweep_delta_m(r, {0.0}, table_settings(QberConvention::DarkCountCorrected));
  EXPECT_TRUE(rows[0].insecure());
  EXPECT_NE(sweep_table(rows, QberConvention::DarkCountCorrected).find("insecure"),
            std::string::npos);
}

TEST(Convention, Parse) {
  EXPECT_EQ(parse_convention("caption"), QberConvention::CaptionRatio);
  EXPECT_EQ(parse_convention("darkcorrected"), QberConvention::DarkCountCorrected);
  EXPECT_THROW(parse_convention("other"), InvalidInput);
}
