#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "eoscope/numeric.hpp"

namespace eoscope {

// Raised by every text grammar in this module. `offset` is the byte position
// in the input where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Epoch milliseconds, UTC.
using Timestamp = std::int64_t;

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff][Z]". Fractions beyond milliseconds are truncated.
Timestamp parse_timestamp(std::string_view text);

// Renders "YYYY-MM-DDTHH:MM:SS.mmm", the layout used by chain exports.
std::string format_timestamp(Timestamp ts);

inline constexpr std::size_t kMaxAccountNameLength = 13;
inline constexpr std::size_t kMaxSymbolLength = 7;
inline constexpr unsigned kMaxPrecision = 18;

enum class NameCheck {
  ok,
  irregular,  // accepted, but outside the a-z1-5. charset or longer than 12
  invalid,    // empty or longer than kMaxAccountNameLength
};

NameCheck check_account_name(std::string_view name);

/// A token is identified by its hosting contract and its symbol; the same
/// symbol under two contracts names two different tokens.
struct TokenId {
  std::string contract;
  std::string symbol;

  std::string to_string() const { return contract + "@" + symbol; }

  friend bool operator==(const TokenId&, const TokenId&) = default;
  friend auto operator<=>(const TokenId&, const TokenId&) = default;
};

TokenId parse_token_id(std::string_view text);

/// Fixed-point asset amount such as "10000.0000 EOSNOW".
class Quantity {
 public:
  Quantity() = default;
  Quantity(Mantissa mantissa, unsigned precision, std::string symbol);

  Mantissa mantissa() const noexcept { return mantissa_; }
  unsigned precision() const noexcept { return precision_; }
  const std::string& symbol() const noexcept { return symbol_; }

  // Renders exactly `precision` fractional digits.
  std::string to_string() const;

  // Both operands must carry the same symbol and precision.
  Quantity& operator+=(const Quantity& other);
  friend Quantity operator+(Quantity lhs, const Quantity& rhs) { return lhs += rhs; }

  friend bool operator==(const Quantity&, const Quantity&) = default;

 private:
  Mantissa mantissa_ = 0;
  unsigned precision_ = 0;
  std::string symbol_;
};

// Grammar: <digits>[.<digits>] <SYMBOL>, one space, SYMBOL in [A-Z]{1,7}.
// Longer all-uppercase symbols are accepted; see symbol_is_conventional.
Quantity parse_quantity(std::string_view text);

bool symbol_is_conventional(std::string_view symbol);

struct TransferAction {
  std::string txid;
  Timestamp block_time = 0;
  TokenId token;
  std::string from;
  std::string to;
  Quantity quantity;
  std::string memo;
};

struct IssueAction {
  std::string txid;
  Timestamp block_time = 0;
  TokenId token;
  std::string issuer;
  std::string to;
  Quantity quantity;
  std::string memo;
};

struct CreateAction {
  std::string txid;
  Timestamp block_time = 0;
  TokenId token;
  std::string creator;
  Quantity max_supply;
};

struct AccountCreation {
  std::string txid;
  Timestamp block_time = 0;
  std::string creator;
  std::string name;
};

}  // namespace eoscope

template <>
struct std::hash<eoscope::TokenId> {
  std::size_t operator()(const eoscope::TokenId& id) const noexcept {
    std::size_t h = std::hash<std::string>{}(id.contract);
    return h ^ (std::hash<std::string>{}(id.symbol) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};
