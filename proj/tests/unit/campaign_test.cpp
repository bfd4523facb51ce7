/*
 * Copyright 2026 The hsfnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <sstream>

#include "hsfnet/campaign.hpp"

namespace hsfnet {
namespace {

using Flags = std::vector<std::pair<std::string, std::string>>;

TEST(Config, Defaults) {
  auto c = parse_config("");
  EXPECT_EQ(c.rows, 24);
  EXPECT_EQ(c.cols, 24);
  EXPECT_EQ(c.policy, StallPolicy::Drop);
  EXPECT_EQ(c.payload_bits, 8);
  EXPECT_EQ(c.base_seed, 1u);
  EXPECT_EQ(c.resolved_destinations().size(), 4u);
}

TEST(Config, ReferenceSweepFlagsAreValid) {
  auto c = parse_config("", Flags{{"rows", "24"}, {"cols", "24"}, {"algo", "rda"}, {"pf", "0.02"}, {"trials", "1000"},
                                  {"dest", "quarters"}});
  EXPECT_EQ(c.algos, std::vector<Algorithm>{Algorithm::Rda});
  EXPECT_EQ(c.p_f, std::vector<double>{0.02});
  EXPECT_EQ(c.trials, 1000);
  EXPECT_TRUE(c.destinations.empty());
}

TEST(Config, RejectsOddRows) {
  try {
    parse_config("", Flags{{"rows", "5"}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("--rows"), std::string::npos);
  }
}

TEST(Config, RejectsProbabilityOutOfRange) {
  EXPECT_THROW(parse_config("", Flags{{"pf", "1.5"}}), ConfigError);
  EXPECT_THROW(parse_config("", Flags{{"pf", "0,-0.1"}}), ConfigError);
  EXPECT_THROW(parse_config("", Flags{{"pf", "abc"}}), ConfigError);
}

TEST(Config, FileErrorsNameTheLine) {
  try {
    parse_config("rows = 8\ncols = 8\n# comment\ncolour = blue\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 4:", 0), 0u) << e.what();
  }
  try {
    parse_config("rows = 8\nrows = 10\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 2:", 0), 0u) << e.what();
  }
  EXPECT_THROW(parse_config("rows 8\n"), ConfigError);
}

TEST(Config, FlagsOverrideFile) {
  auto c = parse_config("rows = 8\ncols = 8\ntrials = 10  # inline comment\ndest = 3:5, 5:3\n", Flags{{"trials", "20"}});
  EXPECT_EQ(c.rows, 8);
  EXPECT_EQ(c.trials, 20);
  EXPECT_EQ(c.destinations, (std::vector<Coord>{{3, 5}, {5, 3}}));
}

TEST(Config, RejectsGatewayAndOutOfBoundsDestinations) {
  EXPECT_THROW(parse_config("rows = 8\ncols = 8\ndest = 8:1\n"), ConfigError);
  EXPECT_THROW(parse_config("rows = 8\ncols = 8\ndest = 0:0\n"), ConfigError);
  EXPECT_THROW(parse_config("rows = 8\ncols = 8\ndest = 7:0\n"), ConfigError);
  EXPECT_THROW(parse_config("", Flags{{"policy", "wait"}}), ConfigError);
  EXPECT_THROW(parse_config("", Flags{{"algo", "rda,bogus"}}), ConfigError);
}

TEST(Quarters, FourDistinctOrientationTypesOnePerQuadrant) {
  for (auto [r, c] : {std::pair{24, 24}, {4, 4}, {6, 6}, {8, 12}, {12, 8}}) {
    GridShape s(r, c);
    auto q = quarter_destinations(s);
    ASSERT_EQ(q.size(), 4u);
    std::set<OrientationType> types;
    std::set<std::pair<bool, bool>> quadrants;
    for (auto d : q) {
      EXPECT_TRUE(s.contains(d));
      EXPECT_FALSE(s.is_gateway_node(d));
      types.insert(orientation(d, s));
      quadrants.insert({2 * d.col >= c, 2 * d.row >= r});
    }
    EXPECT_EQ(types.size(), 4u);
    if (r >= 8 && c >= 8) EXPECT_EQ(quadrants.size(), 4u);
  }
  EXPECT_EQ(quarter_destinations(GridShape(24, 24)), (std::vector<Coord>{{6, 6}, {17, 6}, {6, 17}, {17, 17}}));
}

MetricsRow sample_row() {
  MetricsRow r;
  r.algo = Algorithm::Lfa;
  r.rows = 24;
  r.cols = 24;
  r.p_f = 0.02;
  r.dest_col = 17;
  r.dest_row = 6;
  r.trials = 1000;
  r.delivered_count = 923;
  r.ack_count = 911;
  r.delivered_pct = 92.3;
  r.ack_pct = 91.1;
  r.mean_hops = 24.125;
  r.mean_latency = 2102.5;
  r.drops_blocked = 70;
  r.drops_loopguard = 7;
  r.timeouts = 0;
  return r;
}

TEST(Csv, EmptyListIsHeaderOnly) {
  std::ostringstream os;
  auto n = emit_csv({}, os);
  EXPECT_EQ(os.str(), csv_header() + "\n");
  EXPECT_EQ(n, os.str().size());
}

TEST(Csv, OneRowIsTwoLines) {
  std::ostringstream os;
  emit_csv({sample_row()}, os);
  auto text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_NE(text.find("lfa,24,24,0.02,17,6,1000,923,911,92.30,91.10,24.125,2102.500,70,7,0"), std::string::npos);
}

TEST(Csv, RoundTrip) {
  std::ostringstream os;
  auto row = sample_row();
  emit_csv({row, row}, os);
  auto back = parse_csv(os.str());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(csv_line(back[0]), csv_line(row));
  EXPECT_EQ(back[0].algo, row.algo);
  EXPECT_DOUBLE_EQ(back[0].p_f, row.p_f);
  EXPECT_EQ(back[0].delivered_count, row.delivered_count);
  EXPECT_THROW(parse_csv("nope\n"), ConfigError);
  EXPECT_THROW(parse_csv(csv_header() + "\nrda,1,2\n"), ConfigError);
}

TEST(Csv, WriteFailureThrows) {
  std::ostringstream os;
  os.setstate(std::ios::badbit);
  EXPECT_THROW(emit_csv({sample_row()}, os), std::runtime_error);
}

TEST(Campaign, FaultFreeIsFullDelivery) {
  auto c = parse_config("rows = 8\ncols = 8\nalgo = xy,dfxy,lfa,rda\npf = 0\ntrials = 5\n");
  auto rows = run_campaign(c);
  ASSERT_EQ(rows.size(), 16u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.delivered_pct, 100.0);
    EXPECT_EQ(r.ack_pct, 100.0);
  }
}

TEST(Campaign, RowOrderAndAckAccounting) {
  auto c = parse_config("rows = 12\ncols = 12\nalgo = rda,xy\npf = 0,0.04,0.08\ntrials = 60\n");
  int audited = 0;
  auto rows = run_campaign(c, [&](const MetricsRow& row, const std::vector<TrialResult>& trials) {
    for (const auto& t : trials) {
      if (t.delivered && !t.ack_received) {
        EXPECT_TRUE(t.ack_fate == PacketFate::Dropped || t.ack_fate == PacketFate::StallDropped ||
                    t.ack_fate == PacketFate::TimedOut);
        ++audited;
      }
    }
    EXPECT_EQ(row.delivered_count - row.ack_count,
              std::count_if(trials.begin(), trials.end(), [](auto& t) { return t.delivered && !t.ack_received; }));
  });
  ASSERT_EQ(rows.size(), 2u * 3u * 4u);
  EXPECT_EQ(rows[0].algo, Algorithm::Rda);
  EXPECT_EQ(rows[4].p_f, 0.04);
  EXPECT_EQ(rows[12].algo, Algorithm::Xy);
  for (const auto& r : rows) EXPECT_LE(r.ack_pct, r.delivered_pct);
  EXPECT_GT(audited, 0);
}

TEST(Campaign, ByteIdenticalReruns) {
  auto c = parse_config("rows = 10\ncols = 10\nalgo = lfa,rda\npf = 0.05\ntrials = 40\njitter = 2\n");
  std::ostringstream a, b;
  emit_csv(run_campaign(c), a);
  c.threads = 3;
  emit_csv(run_campaign(c), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(SingleFault, DegeneratePathIsAnError) {
  auto c = parse_config("rows = 6\ncols = 6\ndest = 0:1\n");
  EXPECT_THROW(run_lfa_single_fault(c), ConfigError);
}

TEST(SingleFault, RandomDrawsStayOnThePath) {
  auto c = parse_config("rows = 12\ncols = 12\ntrials = 30\n");
  auto rep = run_lfa_single_fault(c);
  ASSERT_EQ(rep.rows.size(), 4u);
  ASSERT_EQ(rep.cases.size(), 120u);
  for (const auto& k : rep.cases) {
    EXPECT_NE(k.fault, k.dest);
    EXPECT_NE(k.fault, (Coord{0, 0}));
  }
}

}  // namespace
}  // namespace hsfnet
