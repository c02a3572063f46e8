#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "milu/error.hpp"
#include "milu/io.hpp"
#include "random_systems.hpp"

using namespace milu;

namespace {

void expect_identical(const SpdMSystem& a, const SpdMSystem& b) {
  ASSERT_EQ(a.size(), b.size());
  for (Index k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.slack(k), b.slack(k));
    ASSERT_EQ(a.degree(k), b.degree(k));
    for (std::size_t i = 0; i < a.degree(k); ++i) {
      EXPECT_EQ(a.neighbors(k)[i], b.neighbors(k)[i]);
      EXPECT_EQ(a.weights(k)[i], b.weights(k)[i]);
    }
  }
}

ErrorCode read_error(const std::string& text) {
  std::istringstream in(text);
  try {
    read_matrix_market(in);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(MatrixMarket, RoundTripIsBitExact) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = fixtures::random_system(gen, 3 + static_cast<Index>(gen() % 40), 0.15);
    std::stringstream s;
    write_matrix_market(s, a);
    expect_identical(a, read_matrix_market(s));
  }
}

TEST(MatrixMarket, WithoutSlackCommentsRecoversSlackFromDiagonal) {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 3\n"
      "1 1 2\n"
      "2 1 -1\n"
      "2 2 1\n");
  const auto a = read_matrix_market(in);
  EXPECT_DOUBLE_EQ(a.slack(0), 1.0);
  EXPECT_DOUBLE_EQ(a.slack(1), 0.0);
  EXPECT_DOUBLE_EQ(a.entry(0, 1), -1.0);
}

TEST(MatrixMarket, RejectsBadInput) {
  EXPECT_EQ(read_error("not a header\n"), ErrorCode::MalformedFile);
  EXPECT_EQ(read_error("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n"),
            ErrorCode::MalformedFile);
  EXPECT_EQ(read_error("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 -1\n"),
            ErrorCode::MalformedFile);
  EXPECT_EQ(read_error("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1\n2 1 1\n2 2 1\n"),
            ErrorCode::NotAnMMatrix);
}

TEST(JsonSidecar, RoundTrip) {
  std::mt19937_64 gen(9);
  const auto a = fixtures::random_system(gen, 17, 0.2);
  const auto j = system_to_json(a);
  EXPECT_EQ(j.at("n").get<int>(), 17);
  expect_identical(a, system_from_json(nlohmann::json::parse(j.dump())));
}
