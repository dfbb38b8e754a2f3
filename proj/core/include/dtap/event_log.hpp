#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dtap/engine.hpp"

namespace dtap {

/// Microseconds since 1970-01-01T00:00:00Z.
using EpochMicros = std::int64_t;

/// ISO-8601 date-time: `YYYY-MM-DD[(T| )HH:MM[:SS[.frac]]][Z|+HH:MM|-HH:MM|+HHMM]`.
/// Times without an offset are taken as UTC.
std::optional<EpochMicros> parse_timestamp(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SS.ffffff` in UTC.
std::string format_timestamp(EpochMicros when);

/// Start of the Monday (00:00 UTC) on or before `when`.
EpochMicros monday_on_or_before(EpochMicros when);

struct EventRecord {
  std::string case_id;
  std::string activity;
  std::string resource;  // empty for automatic activities
  double start = 0.0;    // hours since EventLog::origin
  double end = 0.0;
  std::size_t line = 0;  // 1-based line of the row in the source file
};

struct LogCase {
  std::string id;
  std::vector<EventRecord> records;  // sorted by start
};

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

/// Parsed log. Cases appear in order of their first row in the file.
struct EventLog {
  std::vector<LogCase> cases;
  std::vector<RejectedRow> rejected;
  EpochMicros origin = 0;  // Monday 00:00 on or before the earliest start
  double span_start = 0.0;
  double span_end = 0.0;

  std::size_t record_count() const;
  double span_hours() const { return span_end - span_start; }
};

class EventLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kEventLogHeader = "case_id,activity,resource,start_timestamp,end_timestamp";

/// Splits CSV text into rows of fields (RFC 4180 quoting). Each row carries
/// the line it starts on.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};
std::vector<CsvRow> parse_csv(std::string_view text);

EventLog parse_event_log_text(std::string_view text);
EventLog parse_event_log(const std::filesystem::path& path);

/// Monday 2024-01-01 00:00 UTC; simulated hour 0 is mapped here by default.
inline constexpr EpochMicros kDefaultLogEpoch = 1704067200LL * 1000000LL;

/// Writes executed activities as an event-log CSV, ordered by start time.
/// Case ids are written as `case_<id>`.
void write_event_log(std::ostream& out, const std::vector<ActivityRecord>& activities,
                     const DtapInstance& instance, EpochMicros epoch = kDefaultLogEpoch);

}  // namespace dtap
