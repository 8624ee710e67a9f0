// Copyright 2026 The xprop-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>

#include "xprop/config.h"
#include "xprop/report.h"

namespace xprop {
namespace {

constexpr const char* kIni = R"(seeds = 3, 1, 2
threads = 2

[data]
m = 50
r_min = 0.1
squared_norm_feature = false

[train]
lr_grid = 0.01, 0.05
)";

TEST(ConfigTest, ParsesSectionsAndTypes) {
  const auto c = Config::parse(kIni);
  EXPECT_EQ(c.get_uints("seeds"), (std::vector<std::uint64_t>{3, 1, 2}));
  EXPECT_EQ(c.get_uint("data.m"), 50u);
  EXPECT_DOUBLE_EQ(c.get_double("data.r_min"), 0.1);
  EXPECT_FALSE(c.get_bool("data.squared_norm_feature"));
  EXPECT_EQ(c.get_doubles("train.lr_grid"), (std::vector<double>{0.01, 0.05}));
  EXPECT_EQ(c.get_uint("data.dim", 4), 4u);
  EXPECT_EQ(c.section("data").size(), 3u);
  EXPECT_EQ(c.section("data").at("m"), "50");
}

TEST(ConfigTest, ErrorsAreConfigErrors) {
  const auto c = Config::parse(kIni);
  EXPECT_THROW(c.get_string("data.missing"), ConfigError);
  EXPECT_THROW(c.get_uint("data.r_min"), ConfigError);
  EXPECT_THROW(c.get_bool("data.m"), ConfigError);
  EXPECT_THROW(Config::parse("[broken\n"), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/x.ini"), ConfigError);
}

TEST(ConfigTest, OverridesChangeTheHash) {
  auto c = Config::parse(kIni);
  const auto h = c.hash();
  EXPECT_EQ(Config::parse(kIni).hash(), h);
  c.set("data.m", "60");
  EXPECT_EQ(c.get_uint("data.m"), 60u);
  EXPECT_NE(c.hash(), h);
  EXPECT_NE(c.canonical().find("data.m = 60\n"), std::string::npos);
}

TEST(ConfigTest, CanonicalFormIgnoresLayout) {
  const auto a = Config::parse("[s]\nb = 2\na = 1\n");
  const auto b = Config::parse("[s]\na=1\n\n; comment\nb   =   2\n");
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(a.hash(), b.hash());
}

TEST(ReportTest, RowsCarryProvenance) {
  ExperimentReport r;
  r.experiment = "demo";
  r.config_hash = 0xabc;
  r.seeds = {1, 2};
  r.add_table("t", {"x", "y"});
  r.add_row("t", "1", {"a", "b"});
  r.footnotes.push_back("skipped 3 instances");
  const auto& t = *r.find("t");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"seed", "config_hash", "x", "y"}));
  EXPECT_EQ(t.rows[0][0], "1");
  EXPECT_EQ(t.rows[0].size(), 4u);
  const auto tsv = r.to_tsv();
  EXPECT_EQ(tsv.rfind("# xprop-lab 0.1.0\n# experiment: demo\n", 0), 0u);
  EXPECT_NE(tsv.find("## table: t\nseed\tconfig_hash\tx\ty\n1\t"), std::string::npos);
  EXPECT_NE(tsv.find("# note: skipped 3 instances"), std::string::npos);
  EXPECT_EQ(tsv, r.to_tsv());
  EXPECT_THROW(r.add_row("t", "1", {"only-one"}), std::logic_error);
  EXPECT_THROW(r.add_row("missing", "1", {}), std::logic_error);
}

TEST(PlotDataTest, LabelFrequencyIsRankSorted) {
  const std::vector<std::size_t> counts{5, 1, 3};
  const auto f = label_frequency(counts);
  using P = std::pair<std::size_t, std::size_t>;
  EXPECT_EQ(f, (std::vector<P>{{1, 5}, {2, 3}, {3, 1}}));
  EXPECT_THROW(label_frequency(std::vector<std::size_t>{}), std::invalid_argument);
}

TEST(PlotDataTest, EmitsSeriesWithoutProvenance) {
  ExperimentReport r;
  r.add_table("label_frequency", {"rank", "count"});
  r.add_row("label_frequency", "-", {"1", "5"});
  EXPECT_EQ(emit_plot_data(r, "label_frequency"), "rank\tcount\n1\t5\n");
  EXPECT_THROW(emit_plot_data(r, "propensity_scatter"), std::invalid_argument);
  EXPECT_THROW(emit_plot_data(r, "metrics"), std::invalid_argument);
}

}  // namespace
}  // namespace xprop
