#include <fstream>
#include <sstream>

#include "doctest.h"
#include "saac/calendar.hpp"
#include "saac/csv.hpp"
#include "saac/error.hpp"
#include "support.hpp"

using namespace saac;
using support::date;

TEST_CASE("dates and weekdays") {
  CHECK(format_date(date("2022-03-07")) == "2022-03-07");
  CHECK(weekday_index(date("2022-03-07")) == 0);
  CHECK(weekday_index(date("2022-03-13")) == 6);
  CHECK(is_weekend(date("2022-03-12")));
  CHECK_FALSE(is_weekend(date("2022-03-11")));
  CHECK(monday_on_or_before(date("2022-04-01")) == date("2022-03-28"));
  CHECK(monday_on_or_before(date("2022-03-28")) == date("2022-03-28"));
  CHECK_FALSE(parse_date("2022-02-30"));
  CHECK_FALSE(parse_date("2022-3-7"));
  CHECK_FALSE(parse_date("yesterday"));
}

TEST_CASE("year-month arithmetic") {
  const YearMonth feb{2024, 2};
  CHECK(feb.days() == 29);
  CHECK(feb.hours() == 696);
  CHECK(YearMonth{2022, 4}.hours() == 720);
  CHECK(YearMonth{2022, 12}.next() == YearMonth{2023, 1});
  CHECK(feb.str() == "2024-02");
  CHECK(YearMonth::parse("2022-07") == YearMonth{2022, 7});
  CHECK_FALSE(YearMonth::parse("2022-13"));
  CHECK_FALSE(YearMonth::parse("2022-7"));
  CHECK(YearMonth::of(date("2022-05-31")) == YearMonth{2022, 5});
  CHECK(feb.first_day() == date("2024-02-01"));
}

TEST_CASE("semester windows") {
  CHECK(semester_of(date("2022-06-30")) == Semester::Spring);
  CHECK(semester_of(date("2022-07-01")) == Semester::Fall);
  CHECK(in_spring_window(date("2022-02-01")));
  CHECK(in_spring_window(date("2022-05-31")));
  CHECK_FALSE(in_spring_window(date("2022-06-01")));
  CHECK_FALSE(in_spring_window(date("2022-01-31")));
  CHECK(in_fall_window(date("2022-09-01")));
  CHECK(in_fall_window(date("2022-11-30")));
  CHECK_FALSE(in_fall_window(date("2022-12-01")));
  CHECK_FALSE(in_fall_window(date("2022-08-31")));
}

TEST_CASE("csv round trip with quoting") {
  support::TempDir dir("csv");
  const auto path = dir.path / "t.csv";
  {
    csv::Writer w(path, {"name", "value", "count"});
    w.field("plain").field(0.1).field(std::int64_t{3}).end_row();
    w.field("with, comma").field(-0.0).field(std::int64_t{-4}).end_row();
    w.field("say \"hi\"\nnext").field(1e-300).field(std::int64_t{0}).end_row();
    CHECK_FALSE(std::filesystem::exists(path));  // nothing visible before commit
    w.commit();
  }
  csv::Reader r(path);
  const auto name = r.column("name"), value = r.column("value"), count = r.column("count");
  REQUIRE(r.next());
  CHECK(r.text(name) == "plain");
  CHECK(*r.real(value) == 0.1);
  REQUIRE(r.next());
  CHECK(r.text(name) == "with, comma");
  CHECK(r.text(value) == "0");
  CHECK(*r.integer(count) == -4);
  REQUIRE(r.next());
  CHECK(r.text(name) == "say \"hi\"\nnext");
  CHECK(*r.real(value) == 1e-300);
  CHECK_FALSE(r.next());
  CHECK_NOTHROW(r.finish());
}

TEST_CASE("shortest round-trip doubles") {
  for (double v : {0.1, 1.0 / 3.0, 2.5, 1e21, 123456789.125, 5e-324}) {
    const auto s = csv::format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(csv::format_double(2.0) == "2");
}

TEST_CASE("reader diagnostics name file, line and column") {
  support::TempDir dir("csvbad");
  const auto path = dir.path / "bad.csv";
  std::ofstream(path) << "cbg,stops\nA,3\nB,-2\nC,x\nD\n";
  csv::Reader r(path);
  const auto cbg = r.column("cbg"), stops = r.column("stops");
  (void)cbg;
  while (r.next()) (void)r.count(stops);
  try {
    r.finish();
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    REQUIRE(e.diagnostics().size() == 3);
    CHECK(e.diagnostics()[0].find("bad.csv:3: column 2 (stops): negative count -2") != std::string::npos);
    CHECK(e.diagnostics()[1].find("bad.csv:4: column 2 (stops)") != std::string::npos);
    CHECK(e.diagnostics()[2].find("bad.csv:5") != std::string::npos);
    CHECK(e.kind() == ErrorKind::Validation);
  }
}

TEST_CASE("missing columns are reported before any row") {
  support::TempDir dir("csvcol");
  const auto path = dir.path / "t.csv";
  std::ofstream(path) << "a,b\n1,2\n";
  csv::Reader r(path);
  CHECK(r.has_column("a"));
  (void)r.column("c");
  CHECK_THROWS_AS(r.finish(), ValidationError);
  CHECK_THROWS_AS(csv::Reader(dir.path / "absent.csv"), Error);
}
