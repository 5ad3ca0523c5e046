#include "wifipoi/simgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "wifipoi/csv.hpp"
#include "wifipoi/error.hpp"
#include "wifipoi/ingest.hpp"
#include "wifipoi/timeutil.hpp"

namespace wifipoi::sim {
namespace {

Point sample_in_disk(Point centre, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return {centre.x + r * std::cos(theta), centre.y + r * std::sin(theta)};
}

Point sample_transit(const Environment& env, double clearance, std::mt19937_64& rng) {
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  bool first = true;
  auto extend = [&](Point p) {
    if (first) {
      min_x = max_x = p.x;
      min_y = max_y = p.y;
      first = false;
    }
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  };
  for (const auto& ap : env.aps) extend(ap.position);
  for (const auto& place : env.places) extend(place.position);

  std::uniform_real_distribution<double> xs(min_x - clearance, max_x + clearance);
  std::uniform_real_distribution<double> ys(min_y - clearance, max_y + clearance);
  Point p;
  for (int attempt = 0; attempt < 64; ++attempt) {
    p = {xs(rng), ys(rng)};
    const bool clear = std::none_of(env.places.begin(), env.places.end(), [&](const Place& pl) {
      return distance(pl.position, p) < clearance;
    });
    if (clear) break;
  }
  return p;
}

// ---- scenario parsing ------------------------------------------------------

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    s = trim(s);
    if (s.empty()) break;
    const auto cut = s.find_first_of(" \t");
    out.push_back(s.substr(0, cut));
    if (cut == std::string_view::npos) break;
    s = s.substr(cut);
  }
  return out;
}

class ScenarioParser {
 public:
  explicit ScenarioParser(std::string_view text) : text_(text) {}

  Scenario run() {
    std::size_t line_no = 0;
    std::string_view rest = text_;
    while (!rest.empty()) {
      ++line_no;
      line_no_ = line_no;
      const auto cut = rest.find('\n');
      std::string_view line = rest.substr(0, cut);
      rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail("unterminated section header");
        open_section(trim(line.substr(1, line.size() - 2)));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail("expected key = value");
      assign(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    finish();
    return std::move(scenario_);
  }

 private:
  enum class Section { None, Scenario, Ap, ApGrid, Place, User };

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::ConfigParse, why, line_no_);
  }

  double number(std::string_view v) const {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      fail("expected a number, got '" + std::string(v) + "'");
    }
    return out;
  }

  std::int64_t integer(std::string_view v) const {
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      fail("expected an integer, got '" + std::string(v) + "'");
    }
    return out;
  }

  // "[dN:]HH:MM" relative to the scenario start.
  Timestamp time_of(std::string_view v) const {
    Timestamp day = 0;
    if (!v.empty() && v.front() == 'd') {
      const auto colon = v.find(':');
      if (colon == std::string_view::npos) fail("bad time '" + std::string(v) + "'");
      day = integer(v.substr(1, colon - 1));
      v = v.substr(colon + 1);
    }
    try {
      return scenario_.start + day * kSecondsPerDay + Timestamp{parse_hhmm(v)} * 60;
    } catch (const Error&) {
      fail("bad time '" + std::string(v) + "'");
    }
  }

  void open_section(std::string_view header) {
    finish_grid();
    const auto parts = words(header);
    if (parts.empty()) fail("empty section header");
    const std::string_view kind = parts[0];
    const std::string arg = parts.size() > 1
                                ? std::string(trim(header.substr(kind.size())))
                                : std::string();
    if (kind == "scenario") {
      section_ = Section::Scenario;
    } else if (!have_start_) {
      fail("the [scenario] section with a start date must come first");
    } else if (kind == "ap") {
      section_ = Section::Ap;
      AccessPoint ap;
      ap.tx_power = default_tx_;
      ap.path_loss_exponent = default_gamma_;
      ap.mac = MacAddress::from_index(next_index_++);
      scenario_.env.aps.push_back(ap);
    } else if (kind == "ap_grid") {
      section_ = Section::ApGrid;
      grid_ = Grid{};
      grid_.tx = default_tx_;
      grid_.gamma = default_gamma_;
    } else if (kind == "place") {
      if (arg.empty()) fail("place section needs a label");
      section_ = Section::Place;
      Place place;
      place.label = arg;
      scenario_.env.places.push_back(place);
    } else if (kind == "user") {
      if (arg.empty()) fail("user section needs an id");
      section_ = Section::User;
      scenario_.users.push_back({arg, arg + "-device", {}});
    } else {
      fail("unknown section '" + std::string(kind) + "'");
    }
  }

  void assign(std::string_view key, std::string_view value) {
    switch (section_) {
      case Section::None:
        fail("key outside of a section");
      case Section::Scenario:
        if (key == "name") {
          scenario_.name = std::string(value);
        } else if (key == "start") {
          try {
            scenario_.start = parse_date(value);
            have_start_ = true;
          } catch (const Error&) {
            fail("bad start date '" + std::string(value) + "'");
          }
        } else if (key == "scan_interval") {
          scenario_.trace.scan_interval = integer(value);
        } else if (key == "noise_sigma") {
          scenario_.trace.noise_sigma = number(value);
        } else if (key == "visibility_floor") {
          scenario_.trace.visibility_floor = number(value);
        } else if (key == "transit_clearance") {
          scenario_.trace.transit_clearance = number(value);
        } else if (key == "tx_power") {
          default_tx_ = number(value);
        } else if (key == "path_loss_exponent") {
          default_gamma_ = number(value);
        } else {
          fail("unknown scenario key '" + std::string(key) + "'");
        }
        return;
      case Section::Ap: {
        auto& ap = scenario_.env.aps.back();
        if (key == "mac") {
          try {
            ap.mac = MacAddress::parse(value);
          } catch (const Error& e) {
            fail(e.what());
          }
        } else if (key == "x") {
          ap.position.x = number(value);
        } else if (key == "y") {
          ap.position.y = number(value);
        } else if (key == "tx_power") {
          ap.tx_power = number(value);
        } else if (key == "path_loss_exponent") {
          ap.path_loss_exponent = number(value);
        } else {
          fail("unknown ap key '" + std::string(key) + "'");
        }
        return;
      }
      case Section::ApGrid: {
        const auto parts = words(value);
        if (key == "origin" && parts.size() == 2) {
          grid_.origin = {number(parts[0]), number(parts[1])};
        } else if (key == "count" && parts.size() == 2) {
          grid_.nx = integer(parts[0]);
          grid_.ny = integer(parts[1]);
        } else if (key == "spacing" && parts.size() == 1) {
          grid_.spacing = number(parts[0]);
        } else if (key == "tx_power" && parts.size() == 1) {
          grid_.tx = number(parts[0]);
        } else if (key == "path_loss_exponent" && parts.size() == 1) {
          grid_.gamma = number(parts[0]);
        } else {
          fail("bad ap_grid entry '" + std::string(key) + "'");
        }
        grid_.open = true;
        return;
      }
      case Section::Place: {
        auto& place = scenario_.env.places.back();
        if (key == "x") {
          place.position.x = number(value);
        } else if (key == "y") {
          place.position.y = number(value);
        } else if (key == "radius") {
          place.radius = number(value);
        } else if (key == "zone") {
          place.zone = std::string(value);
        } else {
          fail("unknown place key '" + std::string(key) + "'");
        }
        return;
      }
      case Section::User: {
        auto& user = scenario_.users.back();
        if (key == "device") {
          user.device = std::string(value);
        } else if (key == "visit") {
          const auto parts = words(value);
          if (parts.size() < 3) fail("visit needs: <place> <start> <end>");
          // Labels may contain spaces; the last two words are the times.
          std::string label;
          for (std::size_t i = 0; i + 2 < parts.size(); ++i) {
            if (!label.empty()) label.push_back(' ');
            label += parts[i];
          }
          user.itinerary.push_back({label, time_of(parts[parts.size() - 2]),
                                    time_of(parts[parts.size() - 1])});
        } else {
          fail("unknown user key '" + std::string(key) + "'");
        }
        return;
      }
    }
  }

  void finish_grid() {
    if (!grid_.open) return;
    if (grid_.nx <= 0 || grid_.ny <= 0 || grid_.spacing <= 0) fail("incomplete ap_grid");
    for (std::int64_t j = 0; j < grid_.ny; ++j) {
      for (std::int64_t i = 0; i < grid_.nx; ++i) {
        AccessPoint ap;
        ap.mac = MacAddress::from_index(next_index_++);
        ap.position = {grid_.origin.x + static_cast<double>(i) * grid_.spacing,
                       grid_.origin.y + static_cast<double>(j) * grid_.spacing};
        ap.tx_power = grid_.tx;
        ap.path_loss_exponent = grid_.gamma;
        scenario_.env.aps.push_back(ap);
      }
    }
    grid_ = Grid{};
  }

  void finish() {
    if (!have_start_) fail("missing [scenario] start date");
    finish_grid();
    try {
      scenario_.env.validate();
      for (const auto& user : scenario_.users) {
        validate_itinerary(user.itinerary);
        for (const auto& stay : user.itinerary) {
          if (scenario_.env.find_place(stay.place) == nullptr) {
            throw Error(ErrorCode::UnknownPlace, "'" + stay.place + "' in itinerary of " + user.user);
          }
        }
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigParse, e.what());
    }
  }

  struct Grid {
    bool open = false;
    Point origin;
    std::int64_t nx = 0;
    std::int64_t ny = 0;
    double spacing = 0.0;
    double tx = -40.0;
    double gamma = 2.5;
  };

  std::string_view text_;
  std::size_t line_no_ = 0;
  Scenario scenario_;
  Section section_ = Section::None;
  Grid grid_;
  std::uint64_t next_index_ = 1;
  bool have_start_ = false;
  double default_tx_ = -40.0;
  double default_gamma_ = 2.5;
};

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

const Place* Environment::find_place(std::string_view label) const {
  const auto it = std::find_if(places.begin(), places.end(),
                               [&](const Place& p) { return p.label == label; });
  return it == places.end() ? nullptr : &*it;
}

void Environment::validate() const {
  std::set<MacAddress> macs;
  for (const auto& ap : aps) {
    if (!macs.insert(ap.mac).second) {
      throw Error(ErrorCode::InvalidParams, "duplicate AP " + ap.mac.str());
    }
  }
  std::set<std::string> labels;
  for (const auto& place : places) {
    if (!labels.insert(place.label).second) {
      throw Error(ErrorCode::InvalidParams, "duplicate place '" + place.label + "'");
    }
  }
}

int rss_at(const AccessPoint& ap, Point position, double noise_sigma, std::mt19937_64& rng) {
  const double d = distance(ap.position, position);
  if (d <= 0.0) throw Error(ErrorCode::ZeroDistance, "receiver sits on AP " + ap.mac.str());
  double rss = ap.tx_power - 10.0 * ap.path_loss_exponent * std::log10(d);
  if (noise_sigma > 0.0) rss += std::normal_distribution<double>(0.0, noise_sigma)(rng);
  const long rounded = std::lround(rss);
  return static_cast<int>(std::clamp<long>(rounded, kMinRssi, -1));
}

int rss_at(const AccessPoint& ap, Point position, double noise_sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return rss_at(ap, position, noise_sigma, rng);
}

void validate_itinerary(const Itinerary& itinerary) {
  for (std::size_t i = 0; i < itinerary.size(); ++i) {
    const auto& stay = itinerary[i];
    if (stay.departure <= stay.arrival) {
      throw Error(ErrorCode::InvalidItinerary, "stay at '" + stay.place + "' ends before it starts");
    }
    if (i > 0 && stay.arrival < itinerary[i - 1].departure) {
      throw Error(ErrorCode::InvalidItinerary, "stay at '" + stay.place + "' overlaps the previous one");
    }
  }
}

Trace generate_trace(const Environment& env, const Itinerary& itinerary,
                     const TraceOptions& options, std::uint64_t seed, std::string user,
                     std::string device) {
  validate_itinerary(itinerary);
  if (options.scan_interval <= 0) {
    throw Error(ErrorCode::InvalidParams, "scan interval must be positive");
  }
  std::vector<const Place*> places;
  for (const auto& stay : itinerary) {
    const Place* place = env.find_place(stay.place);
    if (place == nullptr) throw Error(ErrorCode::UnknownPlace, "'" + stay.place + "'");
    places.push_back(place);
  }

  Trace trace;
  trace.log.user = std::move(user);
  trace.log.device = std::move(device);
  for (const auto& stay : itinerary) {
    trace.truth.push_back({stay.place, stay.arrival, stay.departure});
  }
  if (itinerary.empty()) return trace;

  std::mt19937_64 rng(seed);
  std::size_t current = 0;
  for (Timestamp t = itinerary.front().arrival; t < itinerary.back().departure;
       t += options.scan_interval) {
    while (current < itinerary.size() && itinerary[current].departure <= t) ++current;
    const bool staying = current < itinerary.size() && itinerary[current].arrival <= t;
    const Point where = staying
                            ? sample_in_disk(places[current]->position, places[current]->radius, rng)
                            : sample_transit(env, options.transit_clearance, rng);
    ScanResult scan;
    scan.timestamp = t;
    for (const auto& ap : env.aps) {
      const int rss = rss_at(ap, where, options.noise_sigma, rng);
      if (rss >= options.visibility_floor) scan.observations.push_back({ap.mac, rss});
    }
    if (scan.observations.empty()) continue;
    trace.log.entries.push_back(validate_scan(scan));
  }
  return trace;
}

Scenario parse_scenario(std::string_view text) { return ScenarioParser(text).run(); }

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

void write_truth_csv(std::ostream& out, std::string_view user,
                     std::span<const GroundTruthVisit> truth, Timestamp utc_offset,
                     bool header) {
  if (header) out << "user,day,label,start,end\n";
  for (const auto& visit : truth) {
    Timestamp begin = visit.start;
    while (begin < visit.end) {
      const DayWindow day = day_window(format_date(begin, utc_offset), utc_offset);
      const Timestamp end = std::min(visit.end, day.end - 60);
      out << csv::escape(user) << ',' << format_date(begin, utc_offset) << ','
          << csv::escape(visit.label) << ',' << format_hhmm(begin, utc_offset) << ','
          << format_hhmm(end, utc_offset) << '\n';
      begin = day.end;
    }
  }
}

std::vector<Trace> run_scenario(const Scenario& scenario, std::uint64_t seed) {
  std::vector<Trace> traces;
  traces.reserve(scenario.users.size());
  for (std::size_t i = 0; i < scenario.users.size(); ++i) {
    const auto& plan = scenario.users[i];
    const std::uint64_t user_seed = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
    traces.push_back(generate_trace(scenario.env, plan.itinerary, scenario.trace, user_seed,
                                    plan.user, plan.device));
  }
  return traces;
}

}  // namespace wifipoi::sim
