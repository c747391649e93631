#include "eoscope/model.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace eoscope {

std::string mantissa_to_string(Mantissa value) {
  if (value == 0) return "0";
  bool negative = value < 0;
  // Work in the negative range so the minimum value does not overflow.
  Mantissa v = negative ? value : -value;
  std::string digits;
  while (v != 0) {
    digits.push_back(static_cast<char>('0' - static_cast<int>(v % 10)));
    v /= 10;
  }
  if (negative) digits.push_back('-');
  std::reverse(digits.begin(), digits.end());
  return digits;
}

mpz_class to_mpz(Mantissa value) {
  bool negative = value < 0;
  unsigned __int128 magnitude =
      negative ? static_cast<unsigned __int128>(-(value + 1)) + 1 : static_cast<unsigned __int128>(value);
  mpz_class high(static_cast<unsigned long>(magnitude >> 64));
  mpz_class low(static_cast<unsigned long>(magnitude & 0xffffffffffffffffULL));
  mpz_class result = (high << 64) + low;
  return negative ? mpz_class(-result) : result;
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Reads exactly `width` digits starting at `pos`.
int read_fixed(std::string_view text, std::size_t pos, std::size_t width) {
  if (pos + width > text.size()) throw ParseError("truncated timestamp", text.size());
  int value = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (!is_digit(text[i])) throw ParseError("expected digit in timestamp", i);
    value = value * 10 + (text[i] - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw ParseError(std::string("expected '") + c + "' in timestamp", pos);
  }
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  int y = read_fixed(text, 0, 4);
  expect_char(text, 4, '-');
  int mo = read_fixed(text, 5, 2);
  expect_char(text, 7, '-');
  int d = read_fixed(text, 8, 2);
  expect_char(text, 10, 'T');
  int h = read_fixed(text, 11, 2);
  expect_char(text, 13, ':');
  int mi = read_fixed(text, 14, 2);
  expect_char(text, 16, ':');
  int s = read_fixed(text, 17, 2);

  std::size_t pos = 19;
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    int scale = 100;
    while (pos < text.size() && is_digit(text[pos])) {
      millis += (text[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) throw ParseError("empty fraction in timestamp", pos);
  }
  if (pos < text.size() && text[pos] == 'Z') ++pos;
  if (pos != text.size()) throw ParseError("trailing characters in timestamp", pos);

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError("invalid calendar date", 0);
  if (h > 23 || mi > 59 || s > 60) throw ParseError("invalid time of day", 11);

  auto days = sys_days{ymd}.time_since_epoch().count();
  return ((static_cast<Timestamp>(days) * 24 + h) * 60 + mi) * 60000 + static_cast<Timestamp>(s) * 1000 + millis;
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  constexpr Timestamp kDayMs = 86400000;
  Timestamp day_index = ts >= 0 ? ts / kDayMs : (ts - kDayMs + 1) / kDayMs;
  Timestamp rem = ts - day_index * kDayMs;
  year_month_day ymd{sys_days{days{day_index}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600000), static_cast<int>(rem / 60000 % 60),
                static_cast<int>(rem / 1000 % 60), static_cast<int>(rem % 1000));
  return buf;
}

NameCheck check_account_name(std::string_view name) {
  if (name.empty() || name.size() > kMaxAccountNameLength) return NameCheck::invalid;
  if (name.size() > 12) return NameCheck::irregular;
  for (char c : name) {
    bool regular = (c >= 'a' && c <= 'z') || (c >= '1' && c <= '5') || c == '.';
    if (!regular) return NameCheck::irregular;
  }
  return NameCheck::ok;
}

TokenId parse_token_id(std::string_view text) {
  auto at = text.find('@');
  if (at == std::string_view::npos) throw ParseError("token id has no '@'", text.size());
  if (text.find('@', at + 1) != std::string_view::npos) {
    throw ParseError("token id has more than one '@'", text.find('@', at + 1));
  }
  if (at == 0) throw ParseError("token id has empty contract", 0);
  if (at + 1 == text.size()) throw ParseError("token id has empty symbol", at + 1);
  return TokenId{std::string(text.substr(0, at)), std::string(text.substr(at + 1))};
}

Quantity::Quantity(Mantissa mantissa, unsigned precision, std::string symbol)
    : mantissa_(mantissa), precision_(precision), symbol_(std::move(symbol)) {
  if (precision_ > kMaxPrecision) throw std::invalid_argument("quantity precision exceeds 18");
}

std::string Quantity::to_string() const {
  std::string digits = mantissa_to_string(mantissa_ < 0 ? -mantissa_ : mantissa_);
  if (precision_ > 0) {
    if (digits.size() <= precision_) digits.insert(0, precision_ + 1 - digits.size(), '0');
    digits.insert(digits.size() - precision_, 1, '.');
  }
  if (mantissa_ < 0) digits.insert(0, 1, '-');
  return digits + " " + symbol_;
}

Quantity& Quantity::operator+=(const Quantity& other) {
  if (symbol_ != other.symbol_ || precision_ != other.precision_) {
    throw std::invalid_argument("quantity arithmetic across " + to_string() + " and " + other.to_string());
  }
  mantissa_ += other.mantissa_;
  return *this;
}

bool symbol_is_conventional(std::string_view symbol) {
  return !symbol.empty() && symbol.size() <= kMaxSymbolLength;
}

Quantity parse_quantity(std::string_view text) {
  // 36 digits keeps the mantissa well inside the 128-bit range.
  constexpr std::size_t kMaxDigits = 36;
  std::size_t pos = 0;
  if (!text.empty() && text[0] == '-') throw ParseError("negative amount", 0);
  if (!text.empty() && text[0] == '+') throw ParseError("malformed decimal", 0);

  Mantissa mantissa = 0;
  std::size_t digit_count = 0;
  std::size_t int_digits = 0;
  while (pos < text.size() && is_digit(text[pos])) {
    mantissa = mantissa * 10 + (text[pos] - '0');
    ++pos;
    ++int_digits;
    if (++digit_count > kMaxDigits) throw ParseError("amount has too many digits", pos);
  }
  if (int_digits == 0) throw ParseError("malformed decimal", pos);

  unsigned precision = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && is_digit(text[pos])) {
      mantissa = mantissa * 10 + (text[pos] - '0');
      ++pos;
      ++precision;
      if (++digit_count > kMaxDigits) throw ParseError("amount has too many digits", pos);
    }
    if (precision == 0) throw ParseError("malformed decimal", pos);
    if (precision > kMaxPrecision) throw ParseError("precision exceeds 18 digits", pos);
  }

  if (pos == text.size()) throw ParseError("missing symbol", pos);
  if (text[pos] != ' ') throw ParseError("malformed decimal", pos);
  ++pos;
  std::size_t symbol_start = pos;
  while (pos < text.size() && text[pos] >= 'A' && text[pos] <= 'Z') ++pos;
  if (pos == symbol_start) {
    throw ParseError(pos == text.size() ? "missing symbol" : "symbol must be uppercase A-Z", pos);
  }
  if (pos != text.size()) throw ParseError("symbol must be uppercase A-Z", pos);

  return Quantity(mantissa, precision, std::string(text.substr(symbol_start)));
}

}  // namespace eoscope
