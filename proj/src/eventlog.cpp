#include "mapminer/eventlog.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "mapminer/error.hpp"

namespace mapminer {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Splits one record, honouring double-quoted fields with "" escapes.
// Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_record(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

std::string quote_field(const std::string& s, char delim) {
  const bool needs = s.find(delim) != std::string::npos || s.find('"') != std::string::npos ||
                     (!s.empty() && (s.front() == ' ' || s.back() == ' '));
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct PatternToken {
  char letter = 0;  // 0 for a literal
  std::size_t width = 0;
  std::string literal;
};

std::vector<PatternToken> tokenize_pattern(std::string_view pattern) {
  static constexpr std::string_view kLetters = "dMyHms";
  std::vector<PatternToken> tokens;
  for (std::size_t i = 0; i < pattern.size();) {
    const char c = pattern[i];
    if (kLetters.find(c) != std::string_view::npos) {
      std::size_t j = i;
      while (j < pattern.size() && pattern[j] == c) ++j;
      tokens.push_back({c, j - i, {}});
      i = j;
    } else {
      if (tokens.empty() || tokens.back().letter != 0) tokens.push_back({0, 0, {}});
      tokens.back().literal.push_back(c);
      ++i;
    }
  }
  return tokens;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text, std::string_view pattern) {
  int day = 1, month = 1, year = 1970, hour = 0, minute = 0, second = 0;
  std::size_t pos = 0;
  const auto fail = [&] {
    throw DomainError(fmt::format("timestamp '{}' does not match '{}'", text, pattern));
  };
  for (const auto& tok : tokenize_pattern(pattern)) {
    if (tok.letter == 0) {
      if (text.substr(pos, tok.literal.size()) != tok.literal) fail();
      pos += tok.literal.size();
      continue;
    }
    const std::size_t max_digits = tok.letter == 'y' ? std::max<std::size_t>(tok.width, 4) : 2;
    const std::size_t min_digits = tok.width >= 2 && tok.letter != 'y' ? 2 : 1;
    std::size_t n = 0;
    int value = 0;
    while (pos + n < text.size() && n < max_digits && text[pos + n] >= '0' && text[pos + n] <= '9') {
      value = value * 10 + (text[pos + n] - '0');
      ++n;
    }
    if (n < min_digits) fail();
    pos += n;
    switch (tok.letter) {
      case 'd': day = value; break;
      case 'M': month = value; break;
      case 'y': year = value; break;
      case 'H': hour = value; break;
      case 'm': minute = value; break;
      case 's': second = value; break;
    }
  }
  if (pos != text.size()) fail();
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) fail();
  return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

std::string format_timestamp(Timestamp ts, std::string_view pattern) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(ts);
  const year_month_day ymd{days};
  const hh_mm_ss hms{ts - days};
  std::string out;
  for (const auto& tok : tokenize_pattern(pattern)) {
    if (tok.letter == 0) {
      out += tok.literal;
      continue;
    }
    long value = 0;
    switch (tok.letter) {
      case 'd': value = static_cast<unsigned>(ymd.day()); break;
      case 'M': value = static_cast<unsigned>(ymd.month()); break;
      case 'y': value = static_cast<int>(ymd.year()); break;
      case 'H': value = hms.hours().count(); break;
      case 'm': value = hms.minutes().count(); break;
      case 's': value = hms.seconds().count(); break;
    }
    out += fmt::format("{:0{}d}", value, tok.width);
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], static_cast<int>(i)).second) {
      throw DomainError("duplicate vocabulary label '" + labels_[i] + "'");
    }
  }
}

int Vocabulary::id(const std::string& label) const {
  const auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

EventLog::EventLog(std::vector<Case> cases, SourceMeta meta)
    : cases_(std::move(cases)), meta_(std::move(meta)) {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : cases_) {
    if (c.events.empty()) throw DomainError("case '" + c.case_id + "' has no events");
    event_count_ += c.events.size();
    for (const auto& e : c.events) ++counts[e.activity];
  }
  std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
  // counts is alphabetical already; stable sort keeps that as the tiebreak.
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> labels;
  labels.reserve(ordered.size());
  for (auto& [label, count] : ordered) labels.push_back(label);
  vocabulary_ = Vocabulary(std::move(labels));
}

EventLog parse_log(std::istream& in, const ColumnSchema& schema, std::string source) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyLogError();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_record(line, schema.delimiter);
  if (!header) throw ParseError(1, "unterminated quote in header");
  const auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header->size(); ++i) {
      if (trim((*header)[i]) == name) return i;
    }
    throw SchemaError(name);
  };
  const std::size_t case_col = column(schema.case_id);
  const std::size_t time_col = column(schema.timestamp);
  const std::size_t act_col = column(schema.activity);
  const std::size_t group_col = column(schema.group);
  const std::size_t needed = std::max({case_col, time_col, act_col, group_col}) + 1;

  std::vector<Case> cases;
  std::unordered_map<std::string, std::size_t> case_index;
  std::size_t row = 1;
  std::size_t data_rows = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, schema.delimiter);
    if (!fields) throw ParseError(row, "unterminated quote");
    if (fields->size() < needed) {
      throw ParseError(row, fmt::format("expected at least {} fields, found {}", needed, fields->size()));
    }
    Event event;
    event.case_id = std::string(trim((*fields)[case_col]));
    event.activity = std::string(trim((*fields)[act_col]));
    event.group = std::string(trim((*fields)[group_col]));
    if (event.case_id.empty()) throw ParseError(row, "empty case id");
    if (event.activity.empty()) throw ParseError(row, "empty activity");
    try {
      event.timestamp = parse_timestamp(trim((*fields)[time_col]), schema.timestamp_format);
    } catch (const DomainError& e) {
      throw ParseError(row, e.what());
    }
    ++data_rows;
    auto [it, inserted] = case_index.emplace(event.case_id, cases.size());
    if (inserted) cases.push_back({event.case_id, {}});
    cases[it->second].events.push_back(std::move(event));
  }
  if (cases.empty()) throw EmptyLogError();

  for (auto& c : cases) {
    std::stable_sort(c.events.begin(), c.events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  }
  return EventLog(std::move(cases), SourceMeta{schema, std::move(source), data_rows});
}

EventLog parse_log_file(const std::string& path, const ColumnSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_log(in, schema, path);
}

void write_log(std::ostream& out, const EventLog& log, const ColumnSchema& schema) {
  const char d = schema.delimiter;
  out << quote_field(schema.case_id, d) << d << quote_field(schema.timestamp, d) << d
      << quote_field(schema.activity, d) << d << quote_field(schema.group, d) << '\n';
  for (const auto& c : log.cases()) {
    for (const auto& e : c.events) {
      out << quote_field(e.case_id, d) << d << format_timestamp(e.timestamp, schema.timestamp_format) << d
          << quote_field(e.activity, d) << d << quote_field(e.group, d) << '\n';
    }
  }
}

std::vector<Sequence> encode_cases(const EventLog& log) {
  std::vector<Sequence> out;
  out.reserve(log.cases().size());
  for (const auto& c : log.cases()) {
    Sequence seq;
    seq.reserve(c.events.size());
    for (const auto& e : c.events) seq.push_back(log.vocabulary().id(e.activity));
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<HistogramRow> activity_histogram(const EventLog& log) {
  if (log.event_count() == 0) throw EmptyLogError();
  const auto& vocab = log.vocabulary();
  std::vector<std::size_t> counts(vocab.size(), 0);
  for (const auto& c : log.cases()) {
    for (const auto& e : c.events) ++counts[static_cast<std::size_t>(vocab.id(e.activity))];
  }
  // Vocabulary ids are already frequency-descending with alphabetical ties.
  std::vector<HistogramRow> rows;
  rows.reserve(vocab.size());
  std::size_t running = 0;
  const auto total = static_cast<double>(log.event_count());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    running += counts[i];
    rows.push_back({vocab.labels()[i], counts[i], static_cast<double>(running) / total});
  }
  return rows;
}

}  // namespace mapminer
