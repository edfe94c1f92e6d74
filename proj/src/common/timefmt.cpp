#include "voicesearch/common/timefmt.hpp"

#include <cctype>
#include <cstdio>
#include <ctime>

#include "voicesearch/common/error.hpp"

namespace voicesearch {

Timestamp now_ms() { return std::chrono::time_point_cast<std::chrono::milliseconds>(Clock::now()); }

std::string format_rfc3339(Timestamp t) {
  const auto ms = t.time_since_epoch().count();
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  long frac = static_cast<long>(ms % 1000);
  if (frac < 0) {
    frac += 1000;
    --secs;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03ldZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
  auto fail = [&]() -> Error {
    return Error(Errc::malformed_request, "bad RFC-3339 timestamp '" + std::string(text) + "'");
  };
  auto digits = [&](std::size_t pos, std::size_t count) {
    if (pos + count > text.size()) throw fail();
    int v = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) throw fail();
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  auto expect = [&](std::size_t pos, char c) {
    if (pos >= text.size() || (text[pos] != c && !(c == 'T' && text[pos] == 't'))) throw fail();
  };

  std::tm tm{};
  tm.tm_year = digits(0, 4) - 1900;
  expect(4, '-');
  tm.tm_mon = digits(5, 2) - 1;
  expect(7, '-');
  tm.tm_mday = digits(8, 2);
  expect(10, 'T');
  tm.tm_hour = digits(11, 2);
  expect(13, ':');
  tm.tm_min = digits(14, 2);
  expect(16, ':');
  tm.tm_sec = digits(17, 2);
  if (tm.tm_mon > 11 || tm.tm_mday < 1 || tm.tm_mday > 31 || tm.tm_hour > 23 || tm.tm_min > 59 ||
      tm.tm_sec > 60) {
    throw fail();
  }

  std::size_t pos = 19;
  long millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int n = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (n < 3) millis = millis * 10 + (text[pos] - '0');
      ++n;
      ++pos;
    }
    if (n == 0) throw fail();
    for (; n < 3; ++n) millis *= 10;
  }

  long offset_min = 0;
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '+' ? 1 : -1;
    const int hh = digits(pos + 1, 2);
    expect(pos + 3, ':');
    const int mm = digits(pos + 4, 2);
    offset_min = sign * (hh * 60 + mm);
    pos += 6;
  } else {
    throw fail();
  }
  if (pos != text.size()) throw fail();

  const std::time_t secs = timegm(&tm) - offset_min * 60;
  return Timestamp(std::chrono::milliseconds(static_cast<long long>(secs) * 1000 + millis));
}

}  // namespace voicesearch
