#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "mapminer/error.hpp"
#include "mapminer/eventlog.hpp"

using namespace mapminer;

namespace {

const char* kHeader = "Incident ID;DateStamp;IncidentActivity_Number;IncidentActivity_Type;Assignment Group;KM number\n";

EventLog parse(const std::string& text, const ColumnSchema& schema = {}) {
  std::istringstream in(text);
  return parse_log(in, schema, "test");
}

std::tuple<int, int, int, int, int> day_first(const std::string& s) {
  int d = 0, m = 0, y = 0, hh = 0, mm = 0;
  REQUIRE(std::sscanf(s.c_str(), "%d/%d/%d %d:%d", &d, &m, &y, &hh, &mm) == 5);
  return {y, m, d, hh, mm};
}

}  // namespace

TEST_CASE("an incident export row parses into an event") {
  const auto log = parse(std::string(kHeader) + "IM0000004;7/1/2013 8:17;001A3689763;Reassignment;01;KM0000553\n");
  REQUIRE(log.cases().size() == 1);
  const auto& e = log.cases()[0].events.at(0);
  CHECK(e.case_id == "IM0000004");
  CHECK(e.activity == "Reassignment");
  CHECK(e.group == "01");
  CHECK(format_timestamp(e.timestamp, "yyyy-MM-dd HH:mm") == "2013-01-07 08:17");
  CHECK(log.event_count() == 1);
  CHECK(log.source_meta().rows == 1);
}

TEST_CASE("timestamp patterns") {
  CHECK(format_timestamp(parse_timestamp("25/09/2013 08:27", "d/M/yyyy H:mm"), "d/M/yyyy H:mm") == "25/9/2013 8:27");
  CHECK(parse_timestamp("2013-09-25 08:27:05", "yyyy-MM-dd HH:mm:ss") ==
        parse_timestamp("25/9/2013 8:27", "d/M/yyyy H:mm") + std::chrono::seconds{5});
  CHECK_THROWS_AS(parse_timestamp("31/2/2013 8:00", "d/M/yyyy H:mm"), DomainError);
  CHECK_THROWS_AS(parse_timestamp("1/1/2013 24:00", "d/M/yyyy H:mm"), DomainError);
  CHECK_THROWS_AS(parse_timestamp("1/1/2013 8:00 extra", "d/M/yyyy H:mm"), DomainError);
  CHECK_THROWS_AS(parse_timestamp("1/1/2013 8:5", "d/M/yyyy H:mm"), DomainError);
}

TEST_CASE("empty inputs are rejected") {
  CHECK_THROWS_AS(parse(""), EmptyLogError);
  CHECK_THROWS_AS(parse(kHeader), EmptyLogError);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "\n\n"), EmptyLogError);
}

TEST_CASE("schema and row errors carry the column or row") {
  try {
    parse("Incident ID;DateStamp;Assignment Group\nA;1/1/2013 8:00;01\n");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.column() == "IncidentActivity_Type");
  }
  try {
    parse(std::string(kHeader) + "A;1/1/2013 8:00;1;Open;01;\nA;not a date;2;Closed;01;\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
  }
  try {
    parse(std::string(kHeader) + "A;1/1/2013 8:00;1;   ;01;\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
  CHECK_THROWS_AS(parse(std::string(kHeader) + "A;1/1/2013 8:00\n"), ParseError);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "A;1/1/2013 8:00;1;\"Open;01;\n"), ParseError);
}

TEST_CASE("quoted fields and custom schemas") {
  ColumnSchema schema;
  schema.delimiter = ',';
  schema.case_id = "case";
  schema.timestamp = "time";
  schema.activity = "activity";
  schema.group = "group";
  schema.timestamp_format = "yyyy-MM-dd HH:mm";
  const auto log = parse("case,time,activity,group\n1,2013-01-01 10:00,\"Update, from \"\"cust\"\"\",g\n", schema);
  CHECK(log.cases()[0].events[0].activity == "Update, from \"cust\"");
}

TEST_CASE("cases are grouped and timestamp-sorted") {
  // 10 rows, two cases, shuffled timestamps including ties.
  const std::vector<std::array<std::string, 3>> rows = {
      {"B", "4/11/2013 13:41", "Reassignment"}, {"A", "7/1/2013 8:17", "Reassignment"},
      {"A", "4/11/2013 13:51", "Closed"},       {"B", "4/11/2013 12:09", "Operator Update"},
      {"A", "4/11/2013 12:09", "Assignment"},   {"B", "25/09/2013 08:27", "Operator Update"},
      {"A", "4/11/2013 13:41", "Update from cust"}, {"B", "4/11/2013 13:51", "Caused By CI"},
      {"A", "4/11/2013 12:09", "Operator Update"},  {"B", "4/11/2013 13:41", "Assignment"},
  };
  std::string text = kHeader;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    text += rows[i][0] + ";" + rows[i][1] + ";" + std::to_string(i) + ";" + rows[i][2] + ";0" +
            std::to_string(i % 3) + ";\n";
  }
  const auto log = parse(text);

  // Oracle: stable sort of the raw rows by (first appearance of case, time).
  std::map<std::string, int> first_seen;
  for (const auto& r : rows) first_seen.emplace(r[0], static_cast<int>(first_seen.size()));
  auto expected = rows;
  std::stable_sort(expected.begin(), expected.end(), [&](const auto& a, const auto& b) {
    return std::make_tuple(first_seen[a[0]], day_first(a[1])) < std::make_tuple(first_seen[b[0]], day_first(b[1]));
  });

  REQUIRE(log.cases().size() == 2);
  CHECK(log.cases()[0].case_id == "B");
  CHECK(log.cases()[1].case_id == "A");
  std::size_t k = 0;
  for (const auto& c : log.cases()) {
    for (std::size_t i = 0; i < c.events.size(); ++i, ++k) {
      CHECK(c.events[i].case_id == expected[k][0]);
      CHECK(c.events[i].activity == expected[k][2]);
      if (i > 0) CHECK(c.events[i - 1].timestamp <= c.events[i].timestamp);
    }
  }
  CHECK(k == rows.size());
}

TEST_CASE("vocabulary is frequency-descending with alphabetical ties") {
  const auto log = parse(std::string(kHeader) +
                         "1;1/1/2013 8:00;;b;;\n1;1/1/2013 8:01;;a;;\n1;1/1/2013 8:02;;c;;\n2;1/1/2013 8:00;;c;;\n");
  CHECK(log.vocabulary().labels() == std::vector<std::string>{"c", "a", "b"});
  CHECK(log.vocabulary().id("a") == 1);
  CHECK(log.vocabulary().id("missing") == -1);
}

TEST_CASE("encode_cases") {
  SUBCASE("direct substitution") {
    const auto log = parse(std::string(kHeader) + "1;1/1/2013 8:00;;A;;\n1;1/1/2013 8:01;;B;;\n1;1/1/2013 8:02;;A;;\n");
    CHECK(encode_cases(log) == std::vector<Sequence>{{0, 1, 0}});
  }
  SUBCASE("no cases") { CHECK(encode_cases(EventLog{}).empty()); }
  SUBCASE("symbol multiset matches the histogram") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> acts = {"Assignment", "Operator Update", "Reassignment", "Status Change", "Closed"};
    std::string text = kHeader;
    for (int c = 0; c < 5; ++c) {
      for (int t = 0; t < 6 + c; ++t) {
        text += "IM" + std::to_string(c) + ";1/1/2013 8:" + (t < 10 ? "0" : "") + std::to_string(t) + ";;" +
                acts[rng() % acts.size()] + ";01;\n";
      }
    }
    const auto log = parse(text);
    const auto encoded = encode_cases(log);
    std::vector<std::size_t> recount(log.vocabulary().size(), 0);
    for (std::size_t i = 0; i < encoded.size(); ++i) {
      CHECK(encoded[i].size() == log.cases()[i].events.size());
      for (int s : encoded[i]) ++recount.at(static_cast<std::size_t>(s));
    }
    for (const auto& row : activity_histogram(log)) {
      CHECK(recount[static_cast<std::size_t>(log.vocabulary().id(row.activity))] == row.count);
    }
  }
}

TEST_CASE("activity_histogram") {
  SUBCASE("single event") {
    const auto rows = activity_histogram(parse(std::string(kHeader) + "1;1/1/2013 8:00;;Open;;\n"));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].count == 1);
    CHECK(rows[0].cumulative == 1.0);
  }
  SUBCASE("empty log") { CHECK_THROWS_AS(activity_histogram(EventLog{}), EmptyLogError); }
  SUBCASE("20-event fixture against a tally") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> acts = {"Open", "Closed", "Reopen", "Assignment", "Dial-In"};
    std::unordered_map<std::string, std::size_t> tally;
    std::string text = kHeader;
    for (int i = 0; i < 20; ++i) {
      const auto& a = acts[rng() % acts.size()];
      ++tally[a];
      text += std::to_string(i % 4) + ";1/1/2013 9:" + (i < 10 ? "0" : "") + std::to_string(i) + ";;" + a + ";;\n";
    }
    const auto rows = activity_histogram(parse(text));
    CHECK(rows.size() == tally.size());
    std::size_t sum = 0;
    double prev = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].count == tally[rows[i].activity]);
      if (i > 0) CHECK(rows[i - 1].count >= rows[i].count);
      CHECK(rows[i].cumulative >= prev);
      prev = rows[i].cumulative;
      sum += rows[i].count;
    }
    CHECK(sum == 20);
    CHECK(rows.back().cumulative == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("write_log then parse_log reproduces the log") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> acts = {"Open", "Closed", "Update from cust", "Caused By CI", "Quality; Indicator"};
  for (int trial = 0; trial < 20; ++trial) {
    std::string text = kHeader;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      const auto& a = acts[rng() % acts.size()];
      text += "IM" + std::to_string(rng() % 5) + ";" + std::to_string(1 + rng() % 28) + "/" +
              std::to_string(1 + rng() % 12) + "/2013 " + std::to_string(rng() % 24) + ":" +
              std::to_string(10 + rng() % 50) + ";;\"" + a + "\";0" + std::to_string(rng() % 3) + ";\n";
    }
    const auto log = parse(text);
    std::ostringstream out;
    ColumnSchema schema;
    write_log(out, log, schema);
    const auto again = parse(out.str());
    CHECK(again == log);
    CHECK(encode_cases(again) == encode_cases(log));
  }
}
