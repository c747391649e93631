#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eoscope/detect.hpp"
#include "eoscope/graph.hpp"
#include "eoscope/ingest.hpp"
#include "eoscope/synth.hpp"

namespace eoscope::testing {

// Scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

// Fixture builders. Quantities are written as text ("12.5000 ABC").
TransferAction transfer(const std::string& token, const std::string& from, const std::string& to,
                        const std::string& quantity, Timestamp time, const std::string& memo = "");
IssueAction issue(const std::string& token, const std::string& issuer, const std::string& to,
                  const std::string& quantity, Timestamp time);
CreateAction create(const std::string& token, const std::string& creator, const std::string& max_supply,
                    Timestamp time);
AccountCreation account(const std::string& creator, const std::string& name, Timestamp time);

// "12.3456 SYM" from a precision-4 mantissa.
std::string quantity_text(std::int64_t mantissa, const std::string& symbol);

/// Plain description of an action log, kept apart from Dataset so oracles can
/// work from it directly. Transfers stay in insertion order.
struct World {
  struct Transfer {
    std::string token;  // contract@SYMBOL
    std::string sender;
    std::string receiver;
    std::int64_t amount;  // precision 4
    Timestamp time;
  };

  std::vector<Transfer> transfers;
  std::vector<std::pair<std::string, std::string>> creations;  // (creator, child)
  std::map<std::string, std::int64_t> issued;                   // absent means never issued

  Dataset to_dataset() const;
};

struct WorldShape {
  std::size_t max_senders = 50;
  std::size_t max_actions = 500;
  std::size_t focus_actions = 0;  // when non-zero, exactly this many actions on the focus token
};

inline constexpr const char* kFocusToken = "focuscoin@FOC";

// Random log with a focus token, a few other tokens, parents of varying
// size, unknown-parent senders and occasional never-issued tokens.
World random_world(SplitMix64& rng, const WorldShape& shape);

/// Straight-line evaluation of the detection factors over one token's
/// time-ordered transfers, using lifetime denominators.
class FactorOracle {
 public:
  FactorOracle(const World& world, const std::string& token);

  std::size_t size() const { return actions_.size(); }
  const World::Transfer& action(std::size_t i) const { return actions_[i]; }
  std::set<std::string> senders(std::size_t begin, std::size_t end) const;
  std::string parent_key(const std::string& sender) const;  // "?sender" when unknown

  Rational acf(std::size_t begin, std::size_t end) const;
  Rational anf(const std::string& sender, std::size_t begin, std::size_t end) const;
  Rational tanf(std::size_t begin, std::size_t end) const;
  Rational attnf(std::size_t begin, std::size_t end) const;
  Rational qua(const std::string& sender, std::size_t begin, std::size_t end) const;
  Rational ttqf(const std::set<std::string>& group, std::size_t begin, std::size_t end) const;
  // nullopt when the token was never issued.
  std::optional<Rational> mttqf(std::size_t begin, std::size_t end) const;

  Rational factor(FactorKind kind, std::size_t begin, std::size_t end) const;

  // Exhaustive scan of aligned windows: (start, end) maximising the piece-score sum.
  std::pair<std::size_t, std::size_t> best_window(std::size_t window, std::size_t pieces, FactorKind kind) const;

 private:
  std::string token_;
  std::vector<World::Transfer> actions_;
  std::map<std::string, std::string> parent_;
  std::map<std::string, std::uint64_t> children_;
  std::map<std::string, std::uint64_t> lifetime_count_;
  std::map<std::string, Rational> lifetime_quantity_;  // sum over issued tokens of amount / issued
  std::int64_t issued_ = 0;
};

// PageRank by dense matrix power iteration, keyed by node name.
std::map<std::string, double> dense_pagerank(const TransferGraph& g, double damping = 0.85);

}  // namespace eoscope::testing
