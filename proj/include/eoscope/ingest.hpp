#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eoscope/model.hpp"
#include "json.hpp"

namespace eoscope {

enum class ActionKind { transfer, issue, create, account_creation };

std::string_view to_string(ActionKind kind);

// Rejection of a well-formed record that violates a dataset invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable input; ingest cannot continue.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AccountIndex = std::uint32_t;
using TokenIndex = std::uint32_t;

// Bidirectional string <-> dense index map.
class NameTable {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t index) const { return names_[index]; }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
};

// Offsets into the dataset's text arena; zero lengths when text is not retained.
struct TextRef {
  std::uint64_t offset = 0;
  std::uint32_t txid_len = 0;
  std::uint32_t memo_len = 0;
};

struct TransferRecord {
  Timestamp time;
  Mantissa amount;
  TokenIndex token;
  AccountIndex from;
  AccountIndex to;
  TextRef text;
};

struct IssueRecord {
  Timestamp time;
  Mantissa amount;
  TokenIndex token;
  AccountIndex issuer;
  AccountIndex to;
  TextRef text;
};

struct CreateRecord {
  Timestamp time;
  Mantissa max_supply;
  TokenIndex token;
  AccountIndex creator;
  TextRef text;
};

struct AccountRecord {
  Timestamp time;
  AccountIndex creator;
  AccountIndex name;
  TextRef text;
};

struct TokenInfo {
  TokenId id;
  std::optional<unsigned> precision;
  std::optional<std::size_t> create_record;
  Mantissa issue_total = 0;
};

/// In-memory index of an action log. Records are interned (accounts and
/// tokens become dense integer indices) so memory grows with the number of
/// distinct entities plus a fixed-size record per action. Free text (txid and
/// memo) is kept only when `retain_text` is set.
///
/// Mutable until freeze(); afterwards every collection is sorted by block
/// time (stable, so ties keep insertion order) and the object is read-only.
class Dataset {
 public:
  explicit Dataset(bool retain_text = true) : retain_text_(retain_text) {}

  // Each add_* validates the record and throws ValidationError on rejection.
  void add_transfer(const TransferAction& action);
  void add_issue(const IssueAction& action);
  void add_create(const CreateAction& action);
  void add_account_creation(const AccountCreation& action);

  void freeze();
  bool frozen() const noexcept { return frozen_; }
  bool retains_text() const noexcept { return retain_text_; }

  const NameTable& accounts() const noexcept { return accounts_; }
  const std::vector<TokenInfo>& tokens() const noexcept { return tokens_; }
  std::optional<TokenIndex> find_token(const TokenId& id) const;

  std::span<const TransferRecord> transfers() const noexcept { return transfers_; }
  std::span<const IssueRecord> issues() const noexcept { return issues_; }
  std::span<const CreateRecord> creates() const noexcept { return creates_; }
  std::span<const AccountRecord> account_creations() const noexcept { return account_creations_; }

  // Tokens seen in transfers or issues that have no create record. Valid after freeze().
  const std::vector<TokenIndex>& orphan_tokens() const noexcept { return orphans_; }

  std::string_view txid(const TextRef& ref) const;
  std::string_view memo(const TextRef& ref) const;

  TransferAction transfer_action(std::size_t i) const;
  Quantity issue_total(TokenIndex token) const;

 private:
  void require_mutable() const;
  TokenIndex intern_token(const TokenId& id);
  void check_quantity(const TokenId& token, const Quantity& q) const;
  TextRef store_text(std::string_view txid, std::string_view memo);

  bool retain_text_;
  bool frozen_ = false;
  NameTable accounts_;
  std::vector<TokenInfo> tokens_;
  std::unordered_map<TokenId, TokenIndex> token_index_;
  std::vector<TransferRecord> transfers_;
  std::vector<IssueRecord> issues_;
  std::vector<CreateRecord> creates_;
  std::vector<AccountRecord> account_creations_;
  std::vector<bool> created_names_;  // indexed by AccountIndex
  std::vector<TokenIndex> orphans_;
  std::string text_;
};

struct DatasetStats {
  std::uint64_t n_creates = 0;
  std::uint64_t n_issues = 0;
  std::uint64_t n_transfers = 0;
  std::uint64_t n_account_creations = 0;
  std::uint64_t n_tokens = 0;
  std::uint64_t n_holders = 0;
  std::uint64_t n_creators = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats dataset_stats(const Dataset& ds);

nlohmann::json to_json(const DatasetStats& stats);

struct IngestOptions {
  // Records arriving up to this many positions late are put back in order.
  std::size_t reorder_buffer = 10000;
  // Per-file cap on stored warning messages; counters are always exact.
  std::size_t max_warnings = 100;
};

struct FileReport {
  std::string path;
  ActionKind kind = ActionKind::transfer;
  std::uint64_t lines = 0;  // non-blank lines
  std::uint64_t accepted = 0;
  std::uint64_t skipped = 0;
  std::uint64_t out_of_order = 0;
  std::uint64_t beyond_reorder_buffer = 0;
  std::uint64_t irregular_names = 0;
  std::uint64_t unconventional_symbols = 0;
  std::vector<std::string> warnings;
};

struct IngestReport {
  std::vector<FileReport> files;

  std::uint64_t accepted() const;
  std::uint64_t skipped() const;
};

nlohmann::json to_json(const IngestReport& report);

// Single-line decoders for the JSONL schemas. Unknown keys are ignored.
TransferAction parse_transfer_line(std::string_view line);
IssueAction parse_issue_line(std::string_view line);
CreateAction parse_create_line(std::string_view line);
AccountCreation parse_account_line(std::string_view line);

// Line encoders; keys are written in sorted order.
std::string to_jsonl(const TransferAction& a);
std::string to_jsonl(const IssueAction& a);
std::string to_jsonl(const CreateAction& a);
std::string to_jsonl(const AccountCreation& a);

/// Bounded buffer that repairs local timestamp disorder. Items are released
/// in (time, arrival) order once more than `capacity` are pending. An item
/// older than the last released one cannot be placed correctly any more; it
/// is still released, in arrival order, and counted as late.
template <typename T>
class ReorderBuffer {
 public:
  explicit ReorderBuffer(std::size_t capacity) : capacity_(capacity) {}

  // Returns true when `item` arrived too late to be reordered.
  template <typename Sink>
  bool push(Timestamp time, T item, Sink&& sink) {
    bool late = released_any_ && time < last_released_;
    heap_.push(Entry{late ? last_released_ : time, seq_++, std::move(item)});
    while (heap_.size() > capacity_) release_one(sink);
    return late;
  }

  template <typename Sink>
  void flush(Sink&& sink) {
    while (!heap_.empty()) release_one(sink);
  }

 private:
  struct Entry {
    Timestamp time;
    std::uint64_t seq;
    T item;
    bool operator>(const Entry& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  template <typename Sink>
  void release_one(Sink& sink) {
    // priority_queue::top is const; the entry is popped right after the move.
    Entry& top = const_cast<Entry&>(heap_.top());
    last_released_ = top.time;
    released_any_ = true;
    T item = std::move(top.item);
    heap_.pop();
    sink(std::move(item));
  }

  std::size_t capacity_;
  std::uint64_t seq_ = 0;
  Timestamp last_released_ = 0;
  bool released_any_ = false;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
};

/// Streams one JSONL file through the reorder buffer without retaining it.
/// Malformed lines are skipped and reported; an unreadable file throws IngestError.
FileReport stream_transfers(const std::filesystem::path& path,
                            const std::function<void(TransferAction&&)>& sink,
                            const IngestOptions& options = {});

/// Appends every valid line of `paths` to `ds`. Records the dataset rejects
/// (duplicates, symbol mismatches, ...) are skipped with a warning.
IngestReport ingest_files(Dataset& ds, std::span<const std::filesystem::path> paths, ActionKind kind,
                          const IngestOptions& options = {});

}  // namespace eoscope
