#include <gtest/gtest.h>

#include <sstream>

#include "retrainbench/panel.hpp"
#include "retrainbench/synth.hpp"
#include "test_support.hpp"

using namespace retrainbench;

namespace {

std::string daily_csv(const std::vector<std::pair<std::string, int>>& series, const std::string& start = "2016-01-01") {
  std::ostringstream out;
  out << "unique_id,ds,y\n";
  const Date d0 = *parse_iso_date(start);
  for (const auto& [id, n] : series)
    for (int t = 0; t < n; ++t) out << id << ',' << format_iso_date(d0 + std::chrono::days{t}) << ',' << t + 1 << '\n';
  return out.str();
}

SeriesPanel load(const std::string& text, int f = 7) {
  std::istringstream in(text);
  return load_panel(in, PanelSchema{}, f);
}

}  // namespace

TEST(Panel, LoadsRegularDailySeries) {
  const auto panel = load(daily_csv({{"c", 5}, {"a", 4}, {"b", 6}}));
  ASSERT_EQ(panel.size(), 3u);
  EXPECT_EQ(panel.frequency, 7);
  EXPECT_EQ(panel.spacing_days, 1);
  EXPECT_EQ(panel.series[0].id, "a");
  EXPECT_EQ(panel.series[2].id, "c");
  EXPECT_EQ(panel.series[1].size(), 6u);
  EXPECT_DOUBLE_EQ(panel.series[1].values.back(), 6.0);
  EXPECT_DOUBLE_EQ(panel.series[1].cumsum.back(), 21.0);
}

TEST(Panel, SortsRowsWithinSeries) {
  const auto panel = load("unique_id,ds,y\na,2016-01-03,3\na,2016-01-01,1\na,2016-01-02,2\n");
  EXPECT_EQ(panel.series[0].values, (std::vector<double>{1, 2, 3}));
}

TEST(Panel, GapIsRejectedNamingSeries) {
  const std::string text = "unique_id,ds,y\nA,2016-01-01,1\nA,2016-01-02,1\nA,2016-01-03,1\n"
                           "B,2016-01-01,1\nB,2016-01-02,1\nB,2016-01-04,1\nB,2016-01-05,1\n";
  try {
    load(text);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'B'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("gap of 2 days"), std::string::npos) << msg;
  }
}

TEST(Panel, DuplicateKeyIsRejected) {
  try {
    load("unique_id,ds,y\nA,2016-01-01,1\nA,2016-01-02,2\nA,2016-01-02,3\n");
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("duplicate key (A, 2016-01-02)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("rows 1 and 2"), std::string::npos) << msg;
  }
}

TEST(Panel, UnparseableValueReportsRowIndex) {
  try {
    load("unique_id,ds,y\nA,2016-01-01,1\nA,2016-01-02,abc\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("at row 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load("unique_id,ds,y\nA,2016-13-01,1\n"), Error);
  EXPECT_THROW(load("unique_id,ds,y\nA,2016-01-01,nan\n"), Error);
}

TEST(Panel, NegativeValuesWarnButLoad) {
  const auto panel = load("unique_id,ds,y\nA,2016-01-01,-1\nA,2016-01-02,2\n");
  ASSERT_EQ(panel.warnings.size(), 1u);
  EXPECT_DOUBLE_EQ(panel.series[0].values[0], -1.0);
}

TEST(Panel, M5ShapedInputKeepsEventColumn) {
  const std::string text = "item_store,date,sales,event\n"
                           "FOODS_1_001_CA_1,2016-02-06,3,\n"
                           "FOODS_1_001_CA_1,2016-02-07,5,SuperBowl\n"
                           "FOODS_1_001_CA_1,2016-02-08,2,\n"
                           "FOODS_1_001_CA_1,2016-02-09,0,\n";
  PanelSchema schema;
  schema.id_column = "item_store";
  schema.time_column = "date";
  schema.value_column = "sales";
  std::istringstream in(text);
  const auto panel = load_panel(in, schema, 7);
  ASSERT_EQ(panel.exogenous_names, std::vector<std::string>{"event"});
  EXPECT_EQ(panel.exogenous_labels[0], std::vector<std::string>{"SuperBowl"});
  EXPECT_EQ(panel.series[0].exogenous[0], (std::vector<double>{0, 1, 0, 0}));
}

TEST(Panel, StaticsAndExogenousTablesAttach) {
  std::istringstream main(daily_csv({{"a", 3}, {"b", 3}}));
  std::istringstream statics("unique_id,store\na,CA_1\nb,TX_2\n");
  std::istringstream exog(
      "unique_id,ds,price\na,2016-01-01,1.5\na,2016-01-02,1.5\na,2016-01-03,2\n"
      "b,2016-01-01,3\nb,2016-01-02,3\nb,2016-01-03,3\n");
  const auto panel = load_panel(main, PanelSchema{}, 7, &statics, &exog);
  EXPECT_EQ(panel.static_names, std::vector<std::string>{"store"});
  EXPECT_EQ(panel.series[1].statics, std::vector<std::string>{"TX_2"});
  EXPECT_EQ(panel.exogenous_names, std::vector<std::string>{"price"});
  EXPECT_EQ(panel.series[0].exogenous[0], (std::vector<double>{1.5, 1.5, 2}));

  std::istringstream main2(daily_csv({{"a", 3}, {"c", 3}}));
  std::istringstream statics2("unique_id,store\na,CA_1\n");
  EXPECT_THROW(load_panel(main2, PanelSchema{}, 7, &statics2), Error);
}

TEST(Panel, FilterKeepsSeriesStrictlyLongerThanThreshold) {
  const auto panel = load(daily_csv({{"a", 400}, {"b", 731}, {"c", 1941}}));
  const auto out = filter_min_length(panel, 730);
  EXPECT_EQ(out.panel.size(), 2u);
  EXPECT_EQ(out.dropped, 1u);
  EXPECT_EQ(out.panel.series[0].id, "b");
  EXPECT_EQ(out.panel.series[0].values, panel.series[1].values);
}

TEST(Panel, WeeklyFilterRetainsAllAboveThreeYears) {
  std::ostringstream text;
  text << "unique_id,ds,y\n";
  const Date d0 = *parse_iso_date("2020-01-06");
  for (const char* id : {"x", "y", "z"})
    for (int t = 0; t < 200; ++t) text << id << ',' << format_iso_date(d0 + std::chrono::days{7 * t}) << ",1\n";
  const auto panel = load(text.str(), 52);
  EXPECT_EQ(panel.spacing_days, 7);
  EXPECT_EQ(filter_min_length(panel, default_min_obs(52)).panel.size(), 3u);
}

TEST(Panel, FilterZeroIsIdentityAndEmptyResultErrors) {
  const auto panel = load(daily_csv({{"a", 3}, {"b", 5}}));
  EXPECT_EQ(filter_min_length(panel, 0).panel.size(), 2u);
  try {
    filter_min_length(panel, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no series survive filter"), std::string::npos);
  }
}

TEST(Panel, FilterIsIdempotent) {
  SynthOptions opt;
  opt.series = 40;
  opt.length = 300;
  opt.min_length = 50;
  opt.statics = false;
  const auto panel = make_synthetic_panel(opt);
  for (std::size_t threshold : {60u, 120u, 250u}) {
    const auto once = filter_min_length(panel, threshold).panel;
    const auto twice = filter_min_length(once, threshold);
    EXPECT_EQ(twice.dropped, 0u);
    ASSERT_EQ(twice.panel.size(), once.size());
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(twice.panel.series[i].values, once.series[i].values);
  }
}

TEST(Panel, SliceSplitArithmetic) {
  const auto panel = load(daily_csv({{"a", 10}, {"b", 12}}));
  const std::vector<std::size_t> full{10, 12};
  const auto all = slice(panel, full);
  EXPECT_EQ(all.length(0), 10u);
  EXPECT_EQ(all.length(1), 12u);
  const auto train = slice_holdout(panel, 4);
  EXPECT_EQ(train.begin(1), 0u);
  EXPECT_EQ(train.length(0), 6u);
  EXPECT_EQ(train.length(1), 8u);
  const std::vector<std::size_t> bad{11, 12};
  EXPECT_THROW(slice(panel, bad), Error);
  const auto window = slice(panel, full, 3);
  EXPECT_EQ(window.values(0)[0], 8.0);
}

TEST(Panel, ConsecutiveExpandingSlicesDifferByOneObservation) {
  const auto panel = load(daily_csv({{"a", 10}}));
  for (std::size_t end = 1; end < 10; ++end) {
    const std::vector<std::size_t> e0{end}, e1{end + 1};
    const auto s0 = slice(panel, e0), s1 = slice(panel, e1);
    ASSERT_EQ(s1.length(0), s0.length(0) + 1);
    EXPECT_EQ(s1.begin(0), 0u);
    for (std::size_t k = 0; k < s0.length(0); ++k) EXPECT_EQ(s0.values(0)[k], s1.values(0)[k]);
    EXPECT_EQ(s1.values(0).back(), static_cast<double>(end + 1));
  }
}

TEST(Panel, RoundTripIsStable) {
  SynthOptions opt;
  opt.series = 5;
  opt.length = 60;
  opt.min_length = 30;
  opt.zero_share = 0.1;
  const auto panel = make_synthetic_panel(opt);
  std::ostringstream a, sa;
  write_panel(a, panel);
  write_statics(sa, panel);
  std::istringstream ra(a.str()), rs(sa.str());
  const auto again = load_panel(ra, PanelSchema{}, 7, &rs);
  test::expect_same_panel(panel, again);
  std::ostringstream b, sb;
  write_panel(b, again);
  write_statics(sb, again);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Panel, RoundTripKeepsCategoricalExogenous) {
  const std::string text = "unique_id,ds,y,event,price\n"
                           "a,2016-01-01,1,,2.5\na,2016-01-02,2,Easter,2.5\n"
                           "b,2016-01-01,3,Xmas,1\nb,2016-01-02,4,,1\n";
  const auto panel = load(text);
  std::ostringstream out;
  write_panel(out, panel);
  EXPECT_EQ(out.str(), text);
}
