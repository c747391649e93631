#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eoscope/model.hpp"
#include "json.hpp"

namespace eoscope {

/// SplitMix64 (Steele, Lea & Flood 2014). Every draw the generator makes goes
/// through this so output is identical across compilers and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  // Independent stream for (seed, stream, entity).
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t entity);

  std::uint64_t next();
  // Uniform in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  // Uniform in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

 private:
  std::uint64_t state_;
};

struct ScenarioSpec {
  std::uint64_t seed = 42;
  std::uint32_t n_organic_tokens = 20;
  std::uint32_t n_manipulated_tokens = 5;

  std::uint32_t manipulator_children = 200;
  std::uint32_t burst_actions_per_bot = 20;
  // Amount every burst transfer moves, at precision 4 (200000 = 20.0000).
  // Unset: bots pick irregular amounts instead.
  std::optional<Mantissa> fixed_burst_quantity = 200000;
  std::string manipulator_memo = "mine";
  std::int64_t burst_span_ms = 2LL * 3600 * 1000;

  std::uint32_t n_wallets = 2;
  std::uint32_t wallet_children = 1000;
  double wallet_participation_rate = 0.01;
  std::uint32_t wallet_actions_per_child = 5;

  std::uint32_t organic_users = 300;
  std::uint32_t organic_actions_per_user = 20;

  Timestamp start_time = 1528588800000;  // 2018-06-10T00:00:00Z
  std::int64_t time_span_ms = 30LL * 24 * 3600 * 1000;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

enum class TokenLabel { organic, manipulated };

struct ExpectedCounts {
  std::uint64_t creates = 0;
  std::uint64_t issues = 0;
  std::uint64_t transfers = 0;
  std::uint64_t account_creations = 0;

  friend bool operator==(const ExpectedCounts&, const ExpectedCounts&) = default;
};

struct GroundTruth {
  std::map<TokenId, TokenLabel> labels;
  std::set<std::string> bot_accounts;
  std::set<std::string> wallet_accounts;  // the factories
  std::set<std::string> wallet_children;  // factory-made accounts that transferred
  std::map<std::string, std::string> parent_of;
  std::map<std::string, std::uint64_t> tokens_per_creator;
  std::vector<std::pair<std::string, std::string>> bot_pairs;  // burst partners, both directions
  std::uint64_t memo_injected = 0;  // transfers carrying the manipulator memo
  ExpectedCounts expected_counts;
};

nlohmann::json to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const nlohmann::json& j);

inline constexpr const char* kTransfersFile = "transfers.jsonl";
inline constexpr const char* kIssuesFile = "issues.jsonl";
inline constexpr const char* kCreatesFile = "creates.jsonl";
inline constexpr const char* kAccountsFile = "accounts.jsonl";
inline constexpr const char* kLabelsFile = "labels.json";

/// Writes the four action logs and labels.json into `out_dir` (created if
/// missing). Output depends only on `spec`.
///
/// Manipulated tokens: one parent creates `manipulator_children` bots with
/// sequential names; each bot is issued its stake and then trades only that
/// token with a fixed partner, inside a short burst, at a fixed amount.
/// Organic tokens: users created by the system account spread their actions
/// round-robin over 3-6 tokens with irregular amounts and times; each wallet
/// factory contributes exactly round(rate * wallet_children) children per token.
GroundTruth generate(const ScenarioSpec& spec, const std::filesystem::path& out_dir);

}  // namespace eoscope
