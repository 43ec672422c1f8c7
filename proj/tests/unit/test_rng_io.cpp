#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mfg/errors.hpp"
#include "mfg/io.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {
namespace {

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(rng::philox4x32({0, 0, 0, 0}, {0, 0}), (rng::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(rng::philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (rng::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(rng::philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (rng::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Substream, RandomAccessAndSeparation) {
  const rng::Substream a(5, rng::Purpose::kNoise, 3);
  const rng::Substream b(5, rng::Purpose::kNoise, 3);
  const rng::Substream c(5, rng::Purpose::kTheta, 3);
  EXPECT_EQ(a.normal(1000), b.normal(1000));
  EXPECT_NE(a.uniform(7), c.uniform(7));
  double m = 0.0, v = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = a.normal(static_cast<std::uint64_t>(i));
    m += z / n;
    v += z * z / n;
    const double u = a.uniform(static_cast<std::uint64_t>(i));
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_NEAR(m, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(v, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NE(rng::derive_seed(1, 0), rng::derive_seed(1, 1));
}

TEST(Parallel, ResultsIndependentOfThreads) {
  std::vector<double> a(1000), b(1000);
  set_thread_count(1);
  parallel_for(a.size(), [&](std::size_t i) { a[i] = std::sin(static_cast<double>(i)); });
  set_thread_count(3);
  parallel_for(b.size(), [&](std::size_t i) { b[i] = std::sin(static_cast<double>(i)); });
  set_thread_count(1);
  EXPECT_EQ(a, b);
}

TEST(Csv, NumbersRoundTrip) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-2.5e-10), "-2.5e-10");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Csv, ColumnCountChecked) {
  std::ostringstream os;
  CsvWriter w(os, {"a", "b"});
  w.cell(1).cell(0.5);
  w.end_row();
  EXPECT_EQ(os.str(), "a,b\n1,0.5\n");
  w.cell(2);
  EXPECT_THROW(w.end_row(), InvalidArgument);
}

TEST(Csv, MeasureAndControlLayouts) {
  std::ostringstream m;
  write_measure_csv(m, DiscreteMeasure(2, {0.0, 1.0, 2.0, 3.0}, {0.25, 0.75}));
  EXPECT_EQ(m.str(), "weight,x1,x2\n0.25,0,1\n0.75,2,3\n");
  std::ostringstream u;
  write_step_control_csv(u, StepControl(TimeGrid(1.0, 2), 1, {0.5, -0.5}));
  EXPECT_EQ(u.str(), "slot,t,gamma1\n0,0,0.5\n1,0.5,-0.5\n");
}

}  // namespace
}  // namespace mfg
