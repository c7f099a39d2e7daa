/*
 * Copyright 2026 The WLSLAM Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "wlslam/fingerprint.h"

#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "wlslam/errors.h"

namespace wlslam {
namespace {

Fingerprint Make(const std::map<std::string, double>& readings) {
  return Fingerprint(0., readings);
}

// Direct evaluation over two maps, written independently of the merge in
// the library.
double ReferenceSimilarity(const std::map<std::string, double>& a,
                           const std::map<std::string, double>& b,
                           double sigma_squared, bool geometric) {
  int common = 0;
  double product = 1.;
  for (const auto& [ap, rss] : a) {
    const auto it = b.find(ap);
    if (it == b.end()) continue;
    ++common;
    product *= std::exp(-(rss - it->second) * (rss - it->second) /
                        (2. * sigma_squared));
  }
  if (common == 0) return 0.;
  const double detection =
      static_cast<double>(common) /
      static_cast<double>(a.size() + b.size() - common);
  if (geometric) return detection * std::pow(product, 1. / common);
  return detection * product / common;
}

std::map<std::string, double> RandomReadings(std::mt19937_64* rng,
                                             int universe) {
  std::uniform_int_distribution<int> count(1, universe);
  std::uniform_int_distribution<int> ap(0, universe - 1);
  std::uniform_real_distribution<double> rss(-100., -20.);
  std::map<std::string, double> readings;
  const int n = count(*rng);
  for (int k = 0; k < n; ++k) readings["ap" + std::to_string(ap(*rng))] = rss(*rng);
  return readings;
}

TEST(SimilarityTest, IdenticalSingleApScoresOne) {
  EXPECT_EQ(Similarity(Make({{"A", -50.}}), Make({{"A", -50.}}), {}), 1.);
}

TEST(SimilarityTest, SixDbmDifferenceAtDefaultSigma) {
  const double score = Similarity(Make({{"A", -50.}}), Make({{"A", -56.}}), {});
  EXPECT_NEAR(score, std::exp(-36. / 72.), 1e-15);
  EXPECT_NEAR(score, 0.60653, 1e-5);
}

TEST(SimilarityTest, IdenticalTwoApFingerprintsScoreHalfInLiteralMode) {
  const Fingerprint f = Make({{"A", -50.}, {"B", -60.}});
  EXPECT_EQ(Similarity(f, f, {}), 0.5);
}

TEST(SimilarityTest, IdenticalFingerprintsScoreOneInGeometricMode) {
  SimilarityParams params;
  params.mode = SimilarityMode::kGeometricMean;
  const Fingerprint f = Make({{"A", -50.}, {"B", -60.}, {"C", -70.}});
  EXPECT_EQ(Similarity(f, f, params), 1.);
}

TEST(SimilarityTest, NoCommonApScoresZero) {
  EXPECT_EQ(Similarity(Make({{"A", -50.}}), Make({{"B", -50.}}), {}), 0.);
}

TEST(SimilarityTest, EmptyFingerprintIsRejected) {
  try {
    Similarity(Fingerprint(), Make({{"A", -50.}}), {});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
  EXPECT_THROW(Similarity(Make({{"A", -50.}}), Fingerprint(), {}), Error);
}

TEST(SimilarityTest, MatchesReferenceOnRandomPairs) {
  std::mt19937_64 rng(21);
  for (bool geometric : {false, true}) {
    SimilarityParams params;
    params.mode = geometric ? SimilarityMode::kGeometricMean
                            : SimilarityMode::kLiteral;
    for (int n = 0; n < 2000; ++n) {
      const auto a = RandomReadings(&rng, 12);
      const auto b = RandomReadings(&rng, 12);
      const double expected = ReferenceSimilarity(a, b, 36., geometric);
      EXPECT_NEAR(Similarity(Make(a), Make(b), params), expected,
                  1e-12 * std::max(1., expected));
    }
  }
}

TEST(SimilarityTest, SymmetricAndBounded) {
  std::mt19937_64 rng(22);
  for (bool geometric : {false, true}) {
    SimilarityParams params;
    params.mode = geometric ? SimilarityMode::kGeometricMean
                            : SimilarityMode::kLiteral;
    for (int n = 0; n < 5000; ++n) {
      const Fingerprint a = Make(RandomReadings(&rng, 30));
      const Fingerprint b = Make(RandomReadings(&rng, 30));
      const double ab = Similarity(a, b, params);
      EXPECT_EQ(ab, Similarity(b, a, params));
      EXPECT_GE(ab, 0.);
      EXPECT_LE(ab, 1.);
    }
  }
}

TEST(SimilarityTest, LargerRssDifferenceNeverRaisesScore) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> step(0., 5.);
  for (int n = 0; n < 500; ++n) {
    auto a = RandomReadings(&rng, 8);
    auto b = a;
    const std::string ap = a.begin()->first;
    double previous = Similarity(Make(a), Make(b), {});
    for (int k = 0; k < 20; ++k) {
      b[ap] -= step(rng);
      const double score = Similarity(Make(a), Make(b), {});
      EXPECT_LE(score, previous);
      previous = score;
    }
  }
}

TEST(SimilarityTest, ExclusiveApLowersScore) {
  std::mt19937_64 rng(24);
  for (int n = 0; n < 500; ++n) {
    auto a = RandomReadings(&rng, 10);
    const auto b = a;
    const double before = Similarity(Make(a), Make(b), {});
    a["exclusive"] = -70.;
    EXPECT_LT(Similarity(Make(a), Make(b), {}), before);
  }
}

TEST(SimilarityTest, GateIsInclusive) {
  SimilarityParams params;
  EXPECT_TRUE(PassesSimilarityGate(0.3, params));
  EXPECT_FALSE(PassesSimilarityGate(std::nextafter(0.3, 0.), params));
}

TEST(SimilarityTest, ParamsAreValidated) {
  SimilarityParams params;
  EXPECT_NO_THROW(ValidateSimilarityParams(params));
  params.sigma_squared = 0.;
  EXPECT_THROW(ValidateSimilarityParams(params), Error);
  params = {};
  params.min_similarity = 1.5;
  EXPECT_THROW(ValidateSimilarityParams(params), Error);
  params.min_similarity = -0.1;
  EXPECT_THROW(ValidateSimilarityParams(params), Error);
}

TEST(FingerprintTest, LatestReadingWinsAndIdsAreSorted) {
  const Fingerprint f(3., std::vector<ApReading>{
                              {"b", -60.}, {"a", -50.}, {"b", -65.}});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.readings()[0].ap_id, "a");
  EXPECT_EQ(f.readings()[1].ap_id, "b");
  EXPECT_EQ(f.readings()[1].rss_dbm, -65.);
  EXPECT_EQ(f.timestamp(), 3.);
}

TEST(WifiLogTest, GroupsBurstsAndSkipsComments) {
  std::istringstream in(
      "# header\n"
      "0.0, aa, -50\n"
      "0.5, bb, -60  # trailing comment\n"
      "\n"
      "1.9, aa, -55\n"
      "2.0, cc, -70\n"
      "4.5, aa, -40\n");
  const auto fingerprints = ParseWifiLog(in, "wifi.csv");
  ASSERT_EQ(fingerprints.size(), 3u);
  EXPECT_EQ(fingerprints[0].timestamp(), 0.);
  ASSERT_EQ(fingerprints[0].size(), 2u);
  EXPECT_EQ(fingerprints[0].readings()[0].rss_dbm, -55.);
  EXPECT_EQ(fingerprints[1].timestamp(), 2.);
  EXPECT_EQ(fingerprints[1].size(), 1u);
  EXPECT_EQ(fingerprints[2].timestamp(), 4.5);
}

TEST(WifiLogTest, ErrorsNameFileAndLine) {
  std::istringstream in("0.0, aa, -50\n1.0, bb\n");
  try {
    ParseWifiLog(in, "wifi.csv");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("wifi.csv:2"), std::string::npos);
  }
  std::istringstream bad_number("0.0, aa, loud\n");
  EXPECT_THROW(ParseWifiLog(bad_number, "x"), Error);
  std::istringstream backwards("2.0, aa, -50\n1.0, aa, -50\n");
  EXPECT_THROW(ParseWifiLog(backwards, "x"), Error);
}

TEST(WifiLogTest, WriteThenParseRoundTrips) {
  std::vector<Fingerprint> original;
  original.emplace_back(0., std::map<std::string, double>{{"a", -50.25},
                                                          {"b", -61.5}});
  original.emplace_back(2., std::map<std::string, double>{{"c", -70.}});
  std::stringstream buffer;
  WriteWifiLog(original, buffer);
  const auto parsed = ParseWifiLog(buffer, "buffer");
  ASSERT_EQ(parsed.size(), original.size());
  for (std::size_t n = 0; n < parsed.size(); ++n) {
    EXPECT_EQ(parsed[n].timestamp(), original[n].timestamp());
    ASSERT_EQ(parsed[n].size(), original[n].size());
    for (std::size_t k = 0; k < parsed[n].size(); ++k) {
      EXPECT_EQ(parsed[n].readings()[k].ap_id, original[n].readings()[k].ap_id);
      EXPECT_EQ(parsed[n].readings()[k].rss_dbm,
                original[n].readings()[k].rss_dbm);
    }
  }
}

}  // namespace
}  // namespace wlslam
