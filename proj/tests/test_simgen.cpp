#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "wifipoi/error.hpp"
#include "wifipoi/simgen.hpp"

using namespace wifipoi;
using namespace wifipoi::sim;
using testing_support::mac;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

Environment one_room() {
  Environment env;
  env.aps.push_back({mac(1), {0, 0}, -40, 2.5});
  env.aps.push_back({mac(2), {10, 0}, -40, 2.5});
  env.places.push_back({"Room", {5, 3}, 2.0, ""});
  return env;
}

std::string scenario_path(const std::string& name) {
  return std::string(WIFIPOI_SCENARIO_DIR) + "/" + name + ".ini";
}

}  // namespace

TEST(RssAt, ReferenceDistanceAndDecade) {
  const AccessPoint ap{mac(1), {0, 0}, -30, 2};
  EXPECT_EQ(rss_at(ap, {1, 0}, 0.0, 1), -30);
  EXPECT_EQ(rss_at(ap, {0, 10}, 0.0, 1), -50);
  EXPECT_EQ(rss_at(ap, {1000, 0}, 0.0, 1), -90);
  EXPECT_EQ(rss_at(AccessPoint{mac(1), {0, 0}, -40, 3}, {1000, 0}, 0.0, 1), -100);
  EXPECT_EQ(code_of([&] { rss_at(ap, {0, 0}, 0.0, 1); }), ErrorCode::ZeroDistance);
}

TEST(RssAt, NoiseIsCentredAndClamped) {
  const AccessPoint ap{mac(1), {0, 0}, -40, 2.5};
  std::mt19937_64 rng(1);
  double sum = 0;
  for (int i = 0; i < 4000; ++i) {
    const int v = rss_at(ap, {10, 0}, 4.0, rng);
    EXPECT_LE(v, -1);
    EXPECT_GE(v, -100);
    sum += v;
  }
  EXPECT_NEAR(sum / 4000, -65.0, 0.5);
  EXPECT_EQ(rss_at(AccessPoint{mac(1), {0, 0}, 10, 2}, {1, 0}, 0.0, 1), -1);
}

TEST(GenerateTrace, OneHourTwelveScans) {
  const auto trace = generate_trace(one_room(), {{"Room", 0, 3600}}, TraceOptions{}, 3);
  EXPECT_EQ(trace.log.entries.size(), 12u);
  ASSERT_EQ(trace.truth.size(), 1u);
  EXPECT_EQ(trace.truth[0], (GroundTruthVisit{"Room", 0, 3600}));
  for (std::size_t i = 0; i < trace.log.entries.size(); ++i) {
    EXPECT_EQ(trace.log.entries[i].timestamp, static_cast<Timestamp>(i) * 300);
  }
}

TEST(GenerateTrace, DeterministicPerSeed) {
  const Itinerary it{{"Room", 0, 7200}};
  const auto a = generate_trace(one_room(), it, TraceOptions{}, 9);
  const auto b = generate_trace(one_room(), it, TraceOptions{}, 9);
  const auto c = generate_trace(one_room(), it, TraceOptions{}, 10);
  EXPECT_EQ(a.log, b.log);
  EXPECT_NE(a.log, c.log);
}

TEST(GenerateTrace, ScansAreValid) {
  const auto trace = generate_trace(one_room(), {{"Room", 0, 36000}}, TraceOptions{}, 4);
  for (const auto& s : trace.log.entries) EXPECT_EQ(validate_scan(s), s);
}

TEST(GenerateTrace, Errors) {
  EXPECT_EQ(code_of([] { generate_trace(one_room(), {{"Nowhere", 0, 10}}, TraceOptions{}, 1); }),
            ErrorCode::UnknownPlace);
  EXPECT_EQ(code_of([] {
              generate_trace(one_room(), {{"Room", 0, 1000}, {"Room", 500, 2000}}, TraceOptions{}, 1);
            }),
            ErrorCode::InvalidItinerary);
  EXPECT_EQ(code_of([] { generate_trace(one_room(), {{"Room", 100, 100}}, TraceOptions{}, 1); }),
            ErrorCode::InvalidItinerary);
}

TEST(GenerateTrace, InvisibleScansOmitted) {
  TraceOptions opt;
  opt.visibility_floor = -1;
  opt.noise_sigma = 0;
  EXPECT_TRUE(generate_trace(one_room(), {{"Room", 0, 3600}}, opt, 1).log.entries.empty());
}

TEST(Scenario, OfficeDayShape) {
  const Scenario s = load_scenario(scenario_path("office-day"));
  EXPECT_EQ(s.name, "office-day");
  ASSERT_EQ(s.users.size(), 1u);
  const auto& it = s.users[0].itinerary;
  ASSERT_EQ(it.size(), 6u);
  std::set<std::string> places;
  for (const auto& stay : it) places.insert(stay.place);
  EXPECT_EQ(places.size(), 4u);
  EXPECT_EQ(it.front().place, "Home");
  EXPECT_EQ(it.back().place, "Home");
  EXPECT_EQ(it.front().arrival, s.start);
  EXPECT_EQ(it.front().departure, s.start + 9 * 3600 + 23 * 60);
}

TEST(Scenario, BundledScenariosParse) {
  EXPECT_EQ(load_scenario(scenario_path("mall-11-users")).users.size(), 11u);
  EXPECT_EQ(load_scenario(scenario_path("office-3-days")).users.size(), 1u);
  const auto zones = load_scenario(scenario_path("mall-3-zones"));
  std::set<std::string> z;
  for (const auto& p : zones.env.places) z.insert(p.zone);
  EXPECT_GE(z.size(), 3u);
}

TEST(Scenario, ParsesAllSections) {
  const std::string text = R"(# comment
[scenario]
name = tiny
start = 2024-01-02
scan_interval = 60
noise_sigma = 0
visibility_floor = -90
tx_power = -35
path_loss_exponent = 2

[ap]
x = 1
y = 2

[ap]
mac = AA:BB:CC:DD:EE:FF
x = 5
y = 5
tx_power = -50

[ap_grid]
origin = 100 100
count = 2 3
spacing = 5

[place Big Room]
x = 3
y = 3
radius = 1.5
zone = west

[user carol]
device = phone
visit = Big Room 09:00 d1:01:30
)";
  const Scenario s = parse_scenario(text);
  EXPECT_EQ(s.trace.scan_interval, 60);
  EXPECT_EQ(s.trace.noise_sigma, 0.0);
  ASSERT_EQ(s.env.aps.size(), 8u);
  EXPECT_EQ(s.env.aps[0].mac, MacAddress::from_index(1));
  EXPECT_EQ(s.env.aps[0].tx_power, -35);
  EXPECT_EQ(s.env.aps[1].mac.str(), "aa:bb:cc:dd:ee:ff");
  EXPECT_EQ(s.env.aps[1].tx_power, -50);
  EXPECT_EQ(s.env.aps[7].position.x, 105);
  EXPECT_EQ(s.env.aps[7].position.y, 110);
  ASSERT_NE(s.env.find_place("Big Room"), nullptr);
  EXPECT_EQ(s.env.find_place("Big Room")->zone, "west");
  ASSERT_EQ(s.users.size(), 1u);
  EXPECT_EQ(s.users[0].device, "phone");
  const Timestamp start = parse_date("2024-01-02");
  EXPECT_EQ(s.users[0].itinerary[0].arrival, start + 9 * 3600);
  EXPECT_EQ(s.users[0].itinerary[0].departure, start + kSecondsPerDay + 5400);
}

TEST(Scenario, ParseErrorsCarryLine) {
  const auto line_of = [](const std::string& text) -> std::optional<std::size_t> {
    try {
      parse_scenario(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigParse);
      return e.line();
    }
    ADD_FAILURE() << "accepted: " << text;
    return std::nullopt;
  };
  EXPECT_EQ(line_of("[scenario]\nstart = 2024-01-01\nbogus = 1\n"), 3u);
  EXPECT_EQ(line_of("[place A]\nx = 1\n"), 1u);
  EXPECT_EQ(line_of("[scenario]\nstart = 2024-01-01\n[place A]\nx = one\n"), 4u);
  EXPECT_EQ(line_of("[scenario]\nstart = 2024-13-01\n"), 2u);
  line_of("");
  line_of("[scenario]\nstart = 2024-01-01\n[user u]\nvisit = Nowhere 09:00 10:00\n");
}

TEST(TruthCsv, SplitsAtMidnight) {
  const Timestamp d = parse_date("2024-03-04");
  const std::vector<GroundTruthVisit> truth{{"Office", d + 9 * 3600, d + 10 * 3600},
                                            {"Home", d + 18 * 3600, d + kSecondsPerDay + 8 * 3600}};
  std::ostringstream out;
  write_truth_csv(out, "bob", truth);
  EXPECT_EQ(out.str(),
            "user,day,label,start,end\n"
            "bob,2024-03-04,Office,09:00,10:00\n"
            "bob,2024-03-04,Home,18:00,23:59\n"
            "bob,2024-03-05,Home,00:00,08:00\n");
}

TEST(RunScenario, OneTracePerUserDeterministic) {
  const Scenario s = load_scenario(scenario_path("mall-11-users"));
  const auto a = run_scenario(s, 5);
  const auto b = run_scenario(s, 5);
  ASSERT_EQ(a.size(), 11u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].log, b[i].log);
    EXPECT_EQ(a[i].log.user, s.users[i].user);
  }
  EXPECT_NE(a[0].log.entries, a[1].log.entries);
}
