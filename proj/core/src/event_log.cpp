#include "dtap/event_log.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace dtap {

namespace {

constexpr EpochMicros kMicrosPerSecond = 1000000;
constexpr EpochMicros kMicrosPerDay = 86400 * kMicrosPerSecond;
constexpr double kMicrosPerHour = 3600.0 * 1e6;

// Reads exactly `n` digits at `pos`.
bool read_digits(std::string_view s, std::size_t& pos, int n, int& value) {
  if (pos + static_cast<std::size_t>(n) > s.size()) return false;
  value = 0;
  for (int i = 0; i < n; ++i) {
    const char c = s[pos + static_cast<std::size_t>(i)];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  pos += static_cast<std::size_t>(n);
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

EpochMicros floor_div(EpochMicros a, EpochMicros b) {
  EpochMicros q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::optional<EpochMicros> parse_timestamp(std::string_view text) {
  const std::string_view s = trim(text);
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!read_digits(s, pos, 4, y) || !expect(s, pos, '-') || !read_digits(s, pos, 2, mo) ||
      !expect(s, pos, '-') || !read_digits(s, pos, 2, d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;

  EpochMicros micros = 0;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') return std::nullopt;
    ++pos;
    if (!read_digits(s, pos, 2, h) || !expect(s, pos, ':') || !read_digits(s, pos, 2, mi)) return std::nullopt;
    if (expect(s, pos, ':')) {
      if (!read_digits(s, pos, 2, sec)) return std::nullopt;
      if (expect(s, pos, '.') || expect(s, pos, ',')) {
        EpochMicros scale = 100000;
        std::size_t digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
          micros += scale * (s[pos] - '0');
          scale /= 10;
          ++pos;
          ++digits;
        }
        if (digits == 0) return std::nullopt;
      }
    }
    if (h > 24 || mi > 59 || sec > 60 || (h == 24 && (mi != 0 || sec != 0 || micros != 0))) return std::nullopt;
  }

  EpochMicros offset_minutes = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '+' ? 1 : -1;
      ++pos;
      int oh = 0, om = 0;
      if (!read_digits(s, pos, 2, oh)) return std::nullopt;
      expect(s, pos, ':');
      if (pos < s.size() && !read_digits(s, pos, 2, om)) return std::nullopt;
      if (oh > 23 || om > 59) return std::nullopt;
      offset_minutes = sign * (oh * 60 + om);
    }
  }
  if (pos != s.size()) return std::nullopt;

  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  const EpochMicros seconds = static_cast<EpochMicros>(days) * 86400 + h * 3600 + mi * 60 + sec - offset_minutes * 60;
  return seconds * kMicrosPerSecond + micros;
}

std::string format_timestamp(EpochMicros when) {
  const EpochMicros day = floor_div(when, kMicrosPerDay);
  EpochMicros rest = when - day * kMicrosPerDay;
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
  const auto h = rest / (3600 * kMicrosPerSecond);
  rest -= h * 3600 * kMicrosPerSecond;
  const auto mi = rest / (60 * kMicrosPerSecond);
  rest -= mi * 60 * kMicrosPerSecond;
  const auto sec = rest / kMicrosPerSecond;
  const auto us = rest - sec * kMicrosPerSecond;
  char buffer[96];
  std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%06lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<long long>(h),
                static_cast<long long>(mi), static_cast<long long>(sec), static_cast<long long>(us));
  return buffer;
}

EpochMicros monday_on_or_before(EpochMicros when) {
  const EpochMicros day = floor_div(when, kMicrosPerDay);
  const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{day}}};
  const auto back = (wd.c_encoding() + 6) % 7;  // days since Monday
  return (day - static_cast<EpochMicros>(back)) * kMicrosPerDay;
}

std::size_t EventLog::record_count() const {
  std::size_t n = 0;
  for (const auto& c : cases) n += c.records.size();
  return n;
}

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  std::size_t line = 1;
  row.line = 1;
  bool quoted = false;
  bool row_has_content = false;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&](std::size_t next_line) {
    end_field();
    if (row_has_content || row.fields.size() > 1 || !row.fields.front().empty()) rows.push_back(std::move(row));
    row = CsvRow{};
    row.line = next_line;
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        end_field();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_row(line);
        break;
      default:
        field += c;
    }
  }
  if (!field.empty() || !row.fields.empty() || row_has_content) end_row(line);
  return rows;
}

EventLog parse_event_log_text(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto rows = parse_csv(text);
  if (rows.empty()) throw EventLogError("event log is empty");

  static constexpr std::string_view kColumns[] = {"case_id", "activity", "resource", "start_timestamp",
                                                  "end_timestamp"};
  std::size_t index[5];
  const auto& header = rows.front().fields;
  for (std::size_t k = 0; k < 5; ++k) {
    const auto it = std::find_if(header.begin(), header.end(),
                                 [&](const std::string& name) { return trim(name) == kColumns[k]; });
    if (it == header.end()) throw EventLogError("event log header lacks column '" + std::string(kColumns[k]) + "'");
    index[k] = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t needed = *std::max_element(std::begin(index), std::end(index)) + 1;

  struct Raw {
    std::string case_id, activity, resource;
    EpochMicros start, end;
    std::size_t line;
  };
  std::vector<Raw> accepted;
  EventLog log;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() < needed) {
      log.rejected.push_back({row.line, "expected at least " + std::to_string(needed) + " fields, got " +
                                            std::to_string(row.fields.size())});
      continue;
    }
    const auto field = [&](std::size_t k) { return std::string(trim(row.fields[index[k]])); };
    Raw raw{field(0), field(1), field(2), 0, 0, row.line};
    if (raw.case_id.empty() || raw.activity.empty()) {
      log.rejected.push_back({row.line, "empty case_id or activity"});
      continue;
    }
    const auto start = parse_timestamp(row.fields[index[3]]);
    const auto end = parse_timestamp(row.fields[index[4]]);
    if (!start) {
      log.rejected.push_back({row.line, "unparsable start_timestamp '" + row.fields[index[3]] + "'"});
      continue;
    }
    if (!end) {
      log.rejected.push_back({row.line, "unparsable end_timestamp '" + row.fields[index[4]] + "'"});
      continue;
    }
    if (*end < *start) {
      log.rejected.push_back({row.line, "end_timestamp before start_timestamp"});
      continue;
    }
    raw.start = *start;
    raw.end = *end;
    accepted.push_back(std::move(raw));
  }
  if (accepted.empty()) {
    throw EventLogError("event log has no valid records (" + std::to_string(log.rejected.size()) + " rejected)");
  }

  EpochMicros first = std::numeric_limits<EpochMicros>::max();
  EpochMicros last = std::numeric_limits<EpochMicros>::min();
  for (const auto& raw : accepted) {
    first = std::min(first, raw.start);
    last = std::max(last, raw.end);
  }
  log.origin = monday_on_or_before(first);
  const auto hours = [&](EpochMicros t) { return static_cast<double>(t - log.origin) / kMicrosPerHour; };
  log.span_start = hours(first);
  log.span_end = hours(last);

  std::unordered_map<std::string, std::size_t> case_index;
  for (auto& raw : accepted) {
    auto [it, inserted] = case_index.try_emplace(raw.case_id, log.cases.size());
    if (inserted) log.cases.push_back(LogCase{raw.case_id, {}});
    log.cases[it->second].records.push_back(
        EventRecord{raw.case_id, std::move(raw.activity), std::move(raw.resource), hours(raw.start), hours(raw.end),
                    raw.line});
  }
  for (auto& c : log.cases) {
    std::stable_sort(c.records.begin(), c.records.end(),
                     [](const EventRecord& a, const EventRecord& b) { return a.start < b.start; });
  }
  return log;
}

EventLog parse_event_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EventLogError("cannot open event log '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_event_log_text(buffer.str());
}

void write_event_log(std::ostream& out, const std::vector<ActivityRecord>& activities, const DtapInstance& instance,
                     EpochMicros epoch) {
  std::vector<const ActivityRecord*> ordered;
  ordered.reserve(activities.size());
  for (const auto& a : activities) ordered.push_back(&a);
  std::stable_sort(ordered.begin(), ordered.end(), [](const ActivityRecord* a, const ActivityRecord* b) {
    return a->start < b->start || (a->start == b->start && a->case_id < b->case_id);
  });

  const auto stamp = [&](double h) { return format_timestamp(epoch + static_cast<EpochMicros>(std::llround(h * kMicrosPerHour))); };
  out << kEventLogHeader << '\n';
  for (const auto* a : ordered) {
    out << "case_" << a->case_id << ',' << csv_escape(instance.labels.at(a->label).name) << ','
        << csv_escape(instance.resources.at(a->resource).name) << ',' << stamp(a->start) << ',' << stamp(a->end)
        << '\n';
  }
}

}  // namespace dtap
