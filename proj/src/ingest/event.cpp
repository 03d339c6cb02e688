#include "adrec/ingest/event.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "adrec/error.hpp"
#include "json.hpp"

namespace adrec::ingest {

std::string to_string(Action a) {
  switch (a) {
    case Action::View: return "view";
    case Action::Click: return "click";
    case Action::Browse: return "browse";
  }
  return "view";
}

Action action_from_string(const std::string& s) {
  if (s == "view") return Action::View;
  if (s == "click") return Action::Click;
  if (s == "browse") return Action::Browse;
  throw input_error("unknown action value: \"" + s + "\"");
}

std::string format_labels(const std::vector<int>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(labels[i]);
  }
  return out;
}

namespace {

std::vector<int> parse_labels(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find('|', pos);
    if (next == std::string::npos) next = s.size();
    int v = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + next, v);
    if (ec != std::errc() || p != s.data() + next) throw input_error("bad label value: " + s);
    out.push_back(v);
    pos = next + 1;
    if (next == s.size()) break;
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(',', pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return fields;
}

double parse_double(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw input_error("line " + std::to_string(line_no) + ": bad numeric field \"" + s + "\"");
  }
}

std::int64_t parse_int64(const std::string& s, int line_no) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw input_error("line " + std::to_string(line_no) + ": bad integer field \"" + s + "\"");
  return v;
}

std::vector<EventRecord> parse_csv(std::istream& in) {
  std::vector<EventRecord> events;
  std::string line;
  if (!std::getline(in, line)) throw input_error("empty event stream: missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kEventCsvHeader)
    throw input_error("line 1: unexpected CSV header \"" + line + "\"");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 7 + kEdgeAttrCount)
      throw input_error("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(7 + kEdgeAttrCount) + " fields, got " +
                        std::to_string(fields.size()));
    EventRecord e;
    e.platform_id = fields[0];
    e.raw_user_id = fields[1];
    e.hashed_id = fields[2];
    e.ad_id = fields[3];
    try {
      e.action = action_from_string(fields[4]);
    } catch (const Error& err) {
      throw input_error("line " + std::to_string(line_no) + ": " + err.what());
    }
    e.timestamp = parse_int64(fields[5], line_no);
    e.labels = parse_labels(fields[6]);
    for (int i = 0; i < kEdgeAttrCount; ++i) e.raw_attrs[i] = parse_double(fields[7 + i], line_no);
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<EventRecord> parse_jsonl(std::istream& in) {
  std::vector<EventRecord> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw input_error("line " + std::to_string(line_no) + ": bad JSON: " + ex.what());
    }
    try {
      EventRecord e;
      e.platform_id = j.at("platform_id").get<std::string>();
      e.raw_user_id = j.at("raw_user_id").get<std::string>();
      e.hashed_id = j.at("hashed_id").get<std::string>();
      e.ad_id = j.at("ad_id").get<std::string>();
      e.action = action_from_string(j.at("action").get<std::string>());
      e.timestamp = j.at("timestamp").get<std::int64_t>();
      e.labels = parse_labels(j.at("labels").get<std::string>());
      auto attrs = j.at("attrs");
      if (!attrs.is_array() || attrs.size() != kEdgeAttrCount)
        throw input_error("attrs must be an array of " + std::to_string(kEdgeAttrCount));
      for (int i = 0; i < kEdgeAttrCount; ++i) e.raw_attrs[i] = attrs[i].get<double>();
      events.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw input_error("line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const Error& err) {
      throw input_error("line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return events;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<EventRecord> parse_events(std::istream& in, EventFormat format) {
  return format == EventFormat::Csv ? parse_csv(in) : parse_jsonl(in);
}

std::vector<EventRecord> load_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open events file: " + path);
  const bool jsonl = path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl";
  return parse_events(in, jsonl ? EventFormat::Jsonl : EventFormat::Csv);
}

void write_events_csv(std::ostream& out, const std::vector<EventRecord>& events) {
  out << kEventCsvHeader << '\n';
  for (const auto& e : events) {
    out << e.platform_id << ',' << e.raw_user_id << ',' << e.hashed_id << ',' << e.ad_id << ','
        << to_string(e.action) << ',' << e.timestamp << ',' << format_labels(e.labels);
    for (double a : e.raw_attrs) out << ',' << format_double(a);
    out << '\n';
  }
}

void write_events_jsonl(std::ostream& out, const std::vector<EventRecord>& events) {
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["platform_id"] = e.platform_id;
    j["raw_user_id"] = e.raw_user_id;
    j["hashed_id"] = e.hashed_id;
    j["ad_id"] = e.ad_id;
    j["action"] = to_string(e.action);
    j["timestamp"] = e.timestamp;
    j["labels"] = format_labels(e.labels);
    j["attrs"] = e.raw_attrs;
    out << j.dump() << '\n';
  }
}

}  // namespace adrec::ingest
