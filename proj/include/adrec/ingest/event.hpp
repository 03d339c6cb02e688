#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace adrec::ingest {

enum class Action { View, Click, Browse };

std::string to_string(Action a);
Action action_from_string(const std::string& s);  // throws input_error on unknown value

inline constexpr int kEdgeAttrCount = 12;

// Raw edge-attribute column order, fixed across CSV, normalization and the
// graph: timestamp, ccr group, ad weight index, dwell time, position index,
// session index, hour-of-day, day-of-week, repeat-exposure count, scroll
// depth, platform code, label-match score.
enum EdgeAttr : int {
  kAttrTimestamp = 0,
  kAttrCcrGroup = 1,
  kAttrAdWeightIndex = 2,
  kAttrDwellTime = 3,
  kAttrPositionIndex = 4,
  kAttrSessionIndex = 5,
  kAttrHourOfDay = 6,
  kAttrDayOfWeek = 7,
  kAttrRepeatExposure = 8,
  kAttrScrollDepth = 9,
  kAttrPlatformCode = 10,
  kAttrLabelMatch = 11,
};

/// One user-ad interaction on one platform at one timestamp.
struct EventRecord {
  std::string platform_id;
  std::string raw_user_id;
  std::string hashed_id;
  std::string ad_id;
  Action action = Action::View;
  std::int64_t timestamp = 0;  // unix seconds
  std::vector<int> labels;     // ad content labels; nonempty for clicks
  std::array<double, kEdgeAttrCount> raw_attrs{};
};

enum class EventFormat { Csv, Jsonl };

inline constexpr const char* kEventCsvHeader =
    "platform_id,raw_user_id,hashed_id,ad_id,action,timestamp,labels,"
    "attr_0,attr_1,attr_2,attr_3,attr_4,attr_5,attr_6,attr_7,attr_8,attr_9,attr_10,attr_11";

/// Parses an event log in file order. Malformed rows and unknown action
/// strings raise input_error naming the line.
std::vector<EventRecord> parse_events(std::istream& in, EventFormat format);
std::vector<EventRecord> load_events(const std::string& path);  // format from extension

void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events);
void write_events_jsonl(std::ostream& out, const std::vector<EventRecord>& events);

std::string format_labels(const std::vector<int>& labels);  // pipe-separated

}  // namespace adrec::ingest
