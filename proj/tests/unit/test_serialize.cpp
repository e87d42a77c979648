#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

#include <lrp/error.hpp>
#include <lrp/serialize.hpp>

namespace {

namespace fs = std::filesystem;

lrp::LrpSample contracted_sample() {
  lrp::ModelParams p;
  p.beta = 1.0;
  p.seed = 3;
  return lrp::sample_with_contracted_complement(p, {0, 15}, 20, 160, {}, 4);
}

TEST(SampleJson, RoundTrip) {
  const auto s = contracted_sample();
  const auto doc = lrp::to_json(s);
  const auto back = lrp::sample_from_json(doc);
  EXPECT_EQ(back.lo, s.lo);
  EXPECT_EQ(back.hi, s.hi);
  EXPECT_EQ(back.edges, s.edges);
  ASSERT_EQ(back.supernodes.size(), s.supernodes.size());
  EXPECT_EQ(back.supernodes[0].counts, s.supernodes[0].counts);
  EXPECT_EQ(back.replicate, s.replicate);
  EXPECT_EQ(lrp::dump(lrp::to_json(back)), lrp::dump(doc));
}

TEST(SampleJson, ForbiddenClassesSurvive) {
  lrp::ModelParams p;
  const auto f = lrp::ForbiddenSet::inner_to_outside({-2, 2}, {-4, 4});
  const auto s = lrp::sample_window(p, -4, 4, f, 0);
  const auto doc = lrp::to_json(s);
  ASSERT_FALSE(doc["forbidden"].empty());
  const auto back = lrp::sample_from_json(doc);
  EXPECT_TRUE(back.forbidden.contains(0, 5));
  EXPECT_TRUE(back.forbidden.contains(-9, 2));
  EXPECT_FALSE(back.forbidden.contains(0, 4));
  EXPECT_FALSE(back.forbidden.contains(3, 9));
}

TEST(SampleJson, RejectsInconsistentDocuments) {
  auto doc = lrp::to_json(contracted_sample());
  auto missing_nn = doc;
  missing_nn["edges"].erase(0);
  EXPECT_THROW(lrp::sample_from_json(missing_nn), lrp::Error);
  auto loop = doc;
  loop["edges"].push_back({3, 3});
  EXPECT_THROW(lrp::sample_from_json(loop), lrp::Error);
  auto dup = doc;
  dup["edges"].push_back(doc["edges"][0]);
  EXPECT_THROW(lrp::sample_from_json(dup), lrp::Error);
  auto junk = doc;
  junk["window"] = "wide";
  try {
    lrp::sample_from_json(junk);
    FAIL();
  } catch (const lrp::Error& e) {
    EXPECT_EQ(e.code(), lrp::ErrorCode::parse);
  }
}

TEST(ResultJson, InfiniteIsNull) {
  lrp::Network net;
  const auto a = net.add_vertex(lrp::Site{0});
  const auto b = net.add_vertex(lrp::Site{1});
  const auto r = lrp::two_point_resistance(net, a, b);
  const auto doc = lrp::to_json(r);
  EXPECT_FALSE(doc["connected"].get<bool>());
  EXPECT_TRUE(doc["value"].is_null());
  EXPECT_EQ(lrp::dump(doc).find("inf"), std::string::npos);
}

TEST(ResultJson, FlowOnlyOnRequest) {
  lrp::Network net;
  const auto a = net.add_vertex(lrp::Site{0});
  const auto b = net.add_vertex(lrp::Site{1});
  net.add_conductance(a, b, 2.0);
  const auto r = lrp::two_point_resistance(net, a, b);
  EXPECT_FALSE(lrp::to_json(r).contains("flow"));
  const auto doc = lrp::to_json(r, true);
  ASSERT_EQ(doc["flow"].size(), 1u);
  EXPECT_DOUBLE_EQ(doc["flow"][0]["value"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(doc["value"].get<double>(), 0.5);
}

TEST(Dump, SortedAndStable) {
  lrp::Json doc{{"zeta", 1}, {"alpha", {{"b", 0.1}, {"a", 2}}}};
  const auto text = lrp::dump(doc);
  EXPECT_LT(text.find("alpha"), text.find("zeta"));
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(text, lrp::dump(lrp::Json::parse(text)));
}

TEST(Csv, Headers) {
  lrp::ScalingReport report;
  lrp::Estimate e;
  e.n = 16;
  e.mean = 2.0;
  e.ci95 = {1.5, 2.5};
  e.std_error = 0.25;
  report.estimates.push_back(e);
  const auto csv = lrp::series_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,mean,ci_lo,ci_hi,std_error,series");
  EXPECT_NE(csv.find("16,2,1.5,2.5,0.25,lambda_pp"), std::string::npos) << csv;
  const auto empty = lrp::classification_csv({});
  EXPECT_EQ(empty, std::string(lrp::kClassificationHeader) + "\n");
}

TEST(WriteAtomic, ReplacesContentAndLeavesNoTemporaries) {
  const auto dir = fs::temp_directory_path() / ("lrp_serialize_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto path = dir / "out.json";
  lrp::write_atomic(path, "first\n");
  lrp::write_atomic(path, "second\n");
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), "second\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
  lrp::write_atomic(dir / "nested" / "x.json", "x");
  EXPECT_EQ(fs::file_size(dir / "nested" / "x.json"), 1u);
  EXPECT_THROW(lrp::write_atomic(dir / "nested", "x"), lrp::Error);
  fs::remove_all(dir);
}

}  // namespace
