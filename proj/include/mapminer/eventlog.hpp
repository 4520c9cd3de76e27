#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mapminer {

using Timestamp = std::chrono::sys_seconds;
using Sequence = std::vector<int>;

/// Column layout of a delimited event-log file. Defaults follow the BPI 2014
/// "incident activity" export.
struct ColumnSchema {
  std::string case_id = "Incident ID";
  std::string timestamp = "DateStamp";
  std::string activity = "IncidentActivity_Type";
  std::string group = "Assignment Group";
  char delimiter = ';';
  /// Pattern tokens: d dd M MM yyyy H HH m mm s ss; anything else is literal.
  std::string timestamp_format = "d/M/yyyy H:mm";
};

/// Parses `text` with a timestamp pattern. Throws DomainError on mismatch.
Timestamp parse_timestamp(std::string_view text, std::string_view pattern);
std::string format_timestamp(Timestamp ts, std::string_view pattern);

struct Event {
  std::string case_id;
  Timestamp timestamp;
  std::string activity;
  std::string group;

  friend bool operator==(const Event&, const Event&) = default;
};

struct Case {
  std::string case_id;
  std::vector<Event> events;  // ascending timestamp, ties in input order

  friend bool operator==(const Case&, const Case&) = default;
};

/// Dense activity ids, assigned by descending frequency with alphabetical
/// tiebreak.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Labels in id order.
  explicit Vocabulary(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(int id) const { return labels_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Returns -1 for unknown labels.
  int id(const std::string& label) const;
  bool contains(const std::string& label) const { return id(label) >= 0; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

struct SourceMeta {
  ColumnSchema schema;
  std::string source;  // file path or other description
  std::size_t rows = 0;  // data rows read
};

class EventLog {
 public:
  EventLog() = default;
  /// Builds the vocabulary from the events; cases keep the given order.
  EventLog(std::vector<Case> cases, SourceMeta meta);

  const std::vector<Case>& cases() const { return cases_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const SourceMeta& source_meta() const { return meta_; }
  std::size_t event_count() const { return event_count_; }
  bool empty() const { return cases_.empty(); }

  friend bool operator==(const EventLog& a, const EventLog& b) {
    return a.cases_ == b.cases_ && a.vocabulary_ == b.vocabulary_;
  }

 private:
  std::vector<Case> cases_;
  Vocabulary vocabulary_;
  SourceMeta meta_;
  std::size_t event_count_ = 0;
};

/// Reads a delimited log with a header row. Cases appear in order of first
/// occurrence; events within a case are stably sorted by timestamp.
EventLog parse_log(std::istream& in, const ColumnSchema& schema, std::string source = {});
EventLog parse_log_file(const std::string& path, const ColumnSchema& schema);

/// Writes the four schema columns in the format parse_log reads.
void write_log(std::ostream& out, const EventLog& log, const ColumnSchema& schema);

std::vector<Sequence> encode_cases(const EventLog& log);

struct HistogramRow {
  std::string activity;
  std::size_t count = 0;
  double cumulative = 0.0;
};

/// Descending by count (alphabetical tiebreak). Throws EmptyLogError.
std::vector<HistogramRow> activity_histogram(const EventLog& log);

}  // namespace mapminer
