#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "ntnprs/config.hpp"
#include "ntnprs/montecarlo.hpp"
#include "ntnprs/passes.hpp"

using namespace ntnprs;

namespace {

template <class F>
std::pair<ErrorCode, std::string> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  return {static_cast<ErrorCode>(-1), ""};
}

CampaignConfig small(std::size_t users = 2, std::size_t iterations = 2) {
  CampaignConfig c;
  c.users = users;
  c.iterations = iterations;
  c.seed = 77;
  c.threads = 1;
  c.symbols = {1};
  c.comb_sizes = {4};
  c.ptx_dbw = {30.0};
  return c;
}

std::string csv_of(const SampleSet& s) {
  std::ostringstream os;
  write_samples_csv(os, s.samples);
  return os.str();
}

const char* kIni = R"(# desk
[campaign]
users = 3
iterations = 7
seed = 42

[scenario]
mask_deg = 30
satellites = 4

[prs]
symbols = 1, 12
comb_sizes = 4
ptx_dbw = 1, 30 ; two powers
extra_points = 12:6:30
transmission = burst
)";

}  // namespace

TEST(Config, ParsesIni) {
  std::istringstream in(kIni);
  const auto c = parse_config(in);
  EXPECT_EQ(c.users, 3u);
  EXPECT_EQ(c.iterations, 7u);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_NEAR(c.mask, deg2rad(30.0), 1e-15);
  EXPECT_EQ(c.symbols, (std::vector<int>{1, 12}));
  EXPECT_EQ(c.ptx_dbw, (std::vector<double>{1.0, 30.0}));
  EXPECT_EQ(c.transmission, Extension::kBurst);
  ASSERT_EQ(c.extra_points.size(), 1u);
  EXPECT_EQ(c.extra_points[0], (SweepPoint{12, 6, 30.0}));
}

TEST(Config, DefaultsFollowTheScenario) {
  const CampaignConfig c;
  EXPECT_EQ(c.satellites, 4u);
  EXPECT_DOUBLE_EQ(c.carrier_hz, 2.2e9);
  EXPECT_DOUBLE_EQ(c.doppler_max_hz, 40e3);
  EXPECT_DOUBLE_EQ(c.doppler_step_hz, 500.0);
  EXPECT_EQ(c.transmission, Extension::kPeriodic);
  EXPECT_FALSE(c.noise_enabled());
  EXPECT_EQ(c.noise_variance(), 0.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, SweepIsProductPlusExtras) {
  std::istringstream in(kIni);
  const auto c = parse_config(in);
  const auto s = c.sweep();
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[0], (SweepPoint{1, 4, 1.0}));
  EXPECT_EQ(s[3], (SweepPoint{12, 4, 30.0}));
  EXPECT_EQ(s[4], (SweepPoint{12, 6, 30.0}));
  auto dup = c;
  dup.extra_points.push_back({1, 4, 30.0});
  EXPECT_EQ(dup.sweep().size(), 5u);
}

TEST(Config, OverridesWithAndWithoutSection) {
  CampaignConfig c;
  apply_override(c, "seed=9");
  apply_override(c, "prs.symbols = 4,8");
  apply_override(c, "receiver.noise_dbw=-150");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.symbols, (std::vector<int>{4, 8}));
  EXPECT_TRUE(c.noise_enabled());
  EXPECT_NEAR(c.noise_variance(), 1e-15, 1e-27);
  EXPECT_EQ(error_of([&] { apply_override(c, "bogus=1"); }).first, ErrorCode::kConfig);
  EXPECT_EQ(error_of([&] { apply_override(c, "fit.seed=1"); }).first, ErrorCode::kConfig);
  EXPECT_EQ(error_of([&] { apply_override(c, "seed"); }).first, ErrorCode::kConfig);
  EXPECT_EQ(error_of([&] { apply_override(c, "users=ten"); }).first, ErrorCode::kConfig);
  EXPECT_EQ(error_of([&] { apply_override(c, "transmission=sometimes"); }).first, ErrorCode::kConfig);
}

TEST(Config, ErrorsCarryLineNumbers) {
  {
    std::istringstream in("[campaign]\nusers = 2\nfrobnicate = 1\n");
    const auto [code, what] = error_of([&] { parse_config(in); });
    EXPECT_EQ(code, ErrorCode::kConfig);
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("frobnicate"), std::string::npos) << what;
  }
  {
    std::istringstream in("[campaign]\n[nonsense]\n");
    const auto [code, what] = error_of([&] { parse_config(in); });
    EXPECT_EQ(code, ErrorCode::kConfig);
    EXPECT_NE(what.find("line 2"), std::string::npos);
  }
  std::istringstream orphan("users = 2\n");
  EXPECT_EQ(error_of([&] { parse_config(orphan); }).first, ErrorCode::kConfig);
  EXPECT_EQ(error_of([] { load_config("/nonexistent/desk.ini"); }).first, ErrorCode::kIo);
}

TEST(Config, IniRoundTrip) {
  std::istringstream in(kIni);
  const auto c = parse_config(in);
  std::istringstream again(to_ini(c));
  const auto d = parse_config(again);
  EXPECT_EQ(to_ini(c), to_ini(d));
  EXPECT_EQ(config_hash(c), config_hash(d));
}

TEST(Config, HashIgnoresThreadsOnly) {
  CampaignConfig a;
  auto b = a;
  b.threads = 8;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, ValidateRejectsNonsense) {
  auto c = small();
  c.satellites = 1;
  EXPECT_EQ(error_of([&] { c.validate(); }).first, ErrorCode::kConfig);
  c = small();
  c.comb_sizes = {5};
  EXPECT_EQ(error_of([&] { c.validate(); }).first, ErrorCode::kConfig);
  c = small();
  c.users = 0;
  EXPECT_EQ(error_of([&] { c.validate(); }).first, ErrorCode::kConfig);
}

TEST(Passes, CsvRoundTripMatchesGeneration) {
  const auto users = fibonacci_lattice(2);
  const auto table = generate_passes(users, ShellConfig{}, 30.0, 10.0, deg2rad(25.0));
  ASSERT_FALSE(table.empty());
  EXPECT_EQ(table.user_count(), 2u);
  std::stringstream ss;
  write_passes_csv(ss, table);
  const auto back = read_passes_csv(ss);
  EXPECT_EQ(back.size(), table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& a = table.rows()[i];
    const auto& b = back.rows()[i];
    EXPECT_EQ(a.user_id, b.user_id);
    EXPECT_EQ(a.t, b.t);
    EXPECT_EQ(a.state.sat_id, b.state.sat_id);
    EXPECT_EQ(a.state.position, b.state.position);
    EXPECT_EQ(a.state.velocity, b.state.velocity);
  }
  EXPECT_EQ(table.epochs(users[0].id).size(), 3u);
  for (const auto& e : table.epochs(users[1].id)) {
    for (const auto& r : table.at(e)) {
      EXPECT_GE(look_geometry(users[1], r.state).elevation, deg2rad(25.0) - 1e-12);
    }
  }
  EXPECT_EQ(error_of([&] { (void)table.epochs(99); }).first, ErrorCode::kGeometryConfig);
}

TEST(Passes, RejectsBadRows) {
  const std::string h = std::string(kPassHeader) + "\n";
  const std::string good = "0,0,5,7000000,0,0,0,7500,0\n";
  auto reason = [](const std::string& text) {
    std::istringstream in(text);
    return error_of([&] { read_passes_csv(in); });
  };
  {
    const auto [code, what] = reason(h + good + "0,1,5,6000000,0,0,0,7500,0\n");
    EXPECT_EQ(code, ErrorCode::kLoad);
    EXPECT_NE(what.find("row 3"), std::string::npos) << what;
    EXPECT_NE(what.find("radius"), std::string::npos) << what;
  }
  {
    const auto [code, what] = reason(h + "0,5,5,7000000,0,0,0,7500,0\n" + good);
    EXPECT_EQ(code, ErrorCode::kLoad);
    EXPECT_NE(what.find("time decreases"), std::string::npos) << what;
  }
  EXPECT_EQ(reason(h + "0,0,5,nan,0,0,0,7500,0\n").first, ErrorCode::kLoad);
  EXPECT_EQ(reason(h + "0,0,5,7000000,0,0,0,7500\n").first, ErrorCode::kLoad);
  EXPECT_EQ(reason("user,t\n" + good).first, ErrorCode::kLoad);
  std::istringstream ok(h + good + "1,0,6,0,7000000,0,0,0,7500\n");
  EXPECT_EQ(read_passes_csv(ok).size(), 2u);
  std::istringstream empty("");
  EXPECT_TRUE(read_passes_csv(empty).empty());
  EXPECT_EQ(error_of([] { load_passes("/nonexistent/passes.csv"); }).first, ErrorCode::kIo);
}

TEST(Seeds, DrawSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t u = 0; u < 10; ++u)
    for (std::uint64_t i = 0; i < 10; ++i)
      for (std::uint64_t s = 0; s < 4; ++s) seen.insert(draw_seed(1, u, i, s));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_NE(draw_seed(1, 0, 0, 0), draw_seed(2, 0, 0, 0));
}

TEST(Campaign, OneDrawGivesFourSamples) {
  const auto set = run_campaign(small(1, 1));
  ASSERT_EQ(set.draws.size(), 1u);
  ASSERT_FALSE(set.draws[0].skipped);
  ASSERT_EQ(set.samples.size(), 4u);
  std::set<int> sats;
  for (const auto& s : set.samples) {
    sats.insert(s.sat_of_interest);
    EXPECT_EQ(s.contributions.size(), 3u);
    EXPECT_EQ(s.symbols, 1);
    EXPECT_EQ(s.comb_size, 4);
    EXPECT_EQ(s.ptx_dbw, 30.0);
    EXPECT_DOUBLE_EQ(s.epoch, set.draws[0].epoch);
    EXPECT_LT(s.interference_dbw, -60.0);
  }
  EXPECT_EQ(sats.size(), 4u);
  EXPECT_EQ(set.samples_per_draw, 4u);
  EXPECT_EQ(set.seed, 77u);
}

TEST(Campaign, SameSeedIdentical) {
  const auto a = run_campaign(small());
  const auto b = run_campaign(small());
  EXPECT_EQ(csv_of(a), csv_of(b));
  auto other = small();
  other.seed = 78;
  EXPECT_NE(csv_of(a), csv_of(run_campaign(other)));
}

TEST(Campaign, SerialAndParallelIdentical) {
  auto c = small(3, 2);
  c.symbols = {1, 4};
  const auto serial = run_campaign(c, nullptr, {1});
  const auto parallel = run_campaign(c, nullptr, {4});
  EXPECT_EQ(csv_of(serial), csv_of(parallel));
  std::ostringstream da, db;
  write_draws_csv(da, serial.draws);
  write_draws_csv(db, parallel.draws);
  EXPECT_EQ(da.str(), db.str());
}

TEST(Campaign, Accounting) {
  auto c = small(3, 3);
  c.mask = deg2rad(40.0);
  c.retry_budget = 0;
  const auto set = run_campaign(c);
  const std::size_t tasks = c.users * c.iterations * c.sweep().size();
  EXPECT_EQ(set.draws.size(), tasks);
  EXPECT_EQ(set.samples.size() + c.satellites * set.skipped_draws(), c.satellites * tasks);
  for (const auto& d : set.draws) EXPECT_EQ(d.attempts, 1u);
}

TEST(Campaign, MostlySkippedIsAGeometryError) {
  auto c = small(2, 2);
  c.mask = deg2rad(85.0);
  c.retry_budget = 0;
  EXPECT_EQ(error_of([&] { run_campaign(c); }).first, ErrorCode::kGeometryConfig);
}

TEST(Campaign, CsvSourceNeedsTable) {
  auto c = small(1, 1);
  c.pass_source = PassSource::kCsv;
  EXPECT_EQ(error_of([&] { run_campaign(c); }).first, ErrorCode::kConfig);
  const PassTable empty;
  EXPECT_EQ(error_of([&] { run_campaign(c, &empty); }).first, ErrorCode::kGeometryConfig);
}

TEST(Campaign, CsvSourceDrawsStoredEpochs) {
  auto c = small(2, 3);
  c.pass_source = PassSource::kCsv;
  const auto users = fibonacci_lattice(c.users);
  const auto table = generate_passes(users, c.shell, 20.0, 5.0, c.mask);
  const auto set = run_campaign(c, &table);
  for (const auto& d : set.draws) {
    if (d.skipped) continue;
    EXPECT_EQ(std::fmod(d.epoch, 5.0), 0.0);
    EXPECT_LT(d.epoch, 20.0);
  }
  EXPECT_FALSE(set.samples.empty());
}

TEST(Campaign, DopplerFlagsAgreeWithContributions) {
  const auto set = run_campaign(small(2, 4));
  for (const auto& s : set.samples) {
    bool outside = false;
    for (const auto& k : s.contributions) outside |= std::abs(k.delta_doppler) > 40e3;
    if (outside) {
      EXPECT_NE(s.flags & kFlagDopplerOutsideWindow, 0u);
    }
  }
}

TEST(SampleCsv, RoundTrip) {
  auto set = run_campaign(small(1, 2));
  InterferenceSample floor;
  floor.flags = kFlagFloor;
  floor.symbols = 1;
  floor.comb_size = 4;
  floor.ptx_dbw = 30.0;
  set.samples.push_back(floor);
  const std::string text = csv_of(set);
  EXPECT_EQ(text.substr(0, text.find('\n')), kSampleHeader);
  std::istringstream in(text);
  const auto back = read_samples_csv(in);
  ASSERT_EQ(back.size(), set.samples.size());
  std::ostringstream again;
  write_samples_csv(again, back);
  EXPECT_EQ(again.str(), text);
  for (std::size_t i = 0; i + 1 < back.size(); ++i) {
    EXPECT_NEAR(back[i].interference_dbw, set.samples[i].interference_dbw, 1e-12);
  }
  EXPECT_EQ(back.back().interference, 0.0);
  EXPECT_EQ(back.back().interference_dbw, kInterferenceFloorDbw);
  EXPECT_TRUE(back.back().contributions.empty());
}

TEST(SampleCsv, RejectsMalformedRows) {
  std::istringstream bad(std::string(kSampleHeader) + "\n1,2,3\n");
  const auto [code, what] = error_of([&] { read_samples_csv(bad); });
  EXPECT_EQ(code, ErrorCode::kLoad);
  EXPECT_NE(what.find("row 2"), std::string::npos);
  std::istringstream header("nope\n");
  EXPECT_EQ(error_of([&] { read_samples_csv(header); }).first, ErrorCode::kLoad);
}
