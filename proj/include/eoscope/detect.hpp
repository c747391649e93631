#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "eoscope/ingest.hpp"
#include "eoscope/model.hpp"
#include "eoscope/numeric.hpp"
#include "json.hpp"

namespace eoscope {

// A transfer as seen by the detector: who sent it, how much, and who created
// the sender (nullopt when no creation record exists).
struct DetectAction {
  AccountIndex sender = 0;
  Mantissa amount = 0;
  std::optional<AccountIndex> parent;
  Timestamp time = 0;
};

// One transfer in a sender's cross-token history; kept only when the index is
// built for window-local denominators.
struct SenderEvent {
  Timestamp time;
  TokenIndex token;
  Mantissa amount;
};

struct SenderProfile {
  std::uint64_t total_actions = 0;
  std::map<TokenIndex, std::uint64_t> actions_by_token;
  // amount moved on the token / the token's issued total; never-issued tokens are left out.
  std::map<TokenIndex, Rational> quantity_by_token;
  Rational total_quantity;  // sum of quantity_by_token
  std::vector<SenderEvent> events;  // time-ordered
};

/// Cross-token facts the factors normalise against: every sender's lifetime
/// activity, how many accounts each parent created, and issued totals.
struct DetectionIndex {
  std::unordered_map<AccountIndex, SenderProfile> senders;
  std::unordered_map<AccountIndex, std::uint64_t> children_count;
  std::vector<Mantissa> issue_totals;  // by TokenIndex
  bool has_events = false;

  // Adds one transfer to the sender's lifetime tallies. Call finalize() after the last one.
  void record(AccountIndex sender, TokenIndex token, Mantissa amount, Timestamp time);
  void finalize();

 private:
  std::unordered_map<AccountIndex, std::map<TokenIndex, Mantissa>> amounts_;
};

// Lifetime tallies over every transfer in `ds`, parents from its account creations.
DetectionIndex build_detection_index(const Dataset& ds, bool keep_events = false);

struct DetectionContext {
  TokenIndex token = 0;
  TokenId token_id;
  std::vector<DetectAction> actions;  // time-ordered
  std::shared_ptr<const DetectionIndex> index;
};

// The transfers of one token, with sender parents resolved.
DetectionContext make_context(const Dataset& ds, std::shared_ptr<const DetectionIndex> index, TokenIndex token);

// Half-open action-index span [begin, end).
struct ActionRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const ActionRange&, const ActionRange&) = default;
};

enum class Denominators {
  lifetime,      // a sender's whole history across all tokens
  window_local,  // only the sender's cross-token activity inside the range's time span
};

struct FactorOptions {
  Denominators denominators = Denominators::lifetime;
};

// Inconsistent or unusable detection inputs.
class DetectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Distinct senders over distinct parents; a sender without a known creator
// counts as its own parent.
Rational compute_acf(const DetectionContext& ctx, ActionRange range);

// Sender's transfers of this token in the range over the sender's transfers of all tokens.
Rational compute_anf(const DetectionContext& ctx, AccountIndex sender, ActionRange range,
                     const FactorOptions& opts = {});

Rational compute_tanf(const DetectionContext& ctx, ActionRange range, const FactorOptions& opts = {});

/// TANF divided by the sum over parents of (children ever created) /
/// (children sending in the range). Unknown-parent senders add 1 each.
Rational compute_attnf(const DetectionContext& ctx, ActionRange range, const FactorOptions& opts = {});

// Sum over `group` of each member's normalised quantity on this token
// relative to its normalised quantity on every token it moved.
// Throws DetectError when the token was never issued.
Rational compute_ttqf(const DetectionContext& ctx, std::span<const AccountIndex> group, ActionRange range,
                      const FactorOptions& opts = {});

struct MttqfResult {
  Rational value;
  bool defined = true;  // false when the token has no issued supply; value is then 0
};

// Max TTQF over same-parent sender groups in the range.
MttqfResult compute_mttqf(const DetectionContext& ctx, ActionRange range, const FactorOptions& opts = {});

enum class FactorKind { attnf, mttqf };

struct WindowSearchConfig {
  std::size_t window_size = 100000;
  std::size_t pieces = 10;
  FactorKind flag = FactorKind::attnf;

  // Throws std::invalid_argument unless pieces >= 1, window_size >= pieces
  // and pieces divides window_size.
  void validate() const;
};

struct WindowResult {
  Rational value;
  ActionRange window;
  bool defined = true;
};

// Factor of `range` for the given kind; undefined MTTQF reads as 0.
WindowResult evaluate_factor(const DetectionContext& ctx, ActionRange range, FactorKind kind,
                             const FactorOptions& opts = {});

/// Scores every full piece of W/P actions, slides a P-piece span over the
/// scores keeping the earliest span with the largest sum, and recomputes the
/// factor over that W-action window. Lists shorter than W are scored whole.
WindowResult search_max_factor(const DetectionContext& ctx, const WindowSearchConfig& cfg,
                               const FactorOptions& opts = {});

struct Thresholds {
  Rational attnf = 50;
  Rational mttqf = 10000;
};

struct FactorReport {
  TokenId token;
  std::size_t n_actions = 0;
  Rational acf;
  Rational tanf;
  Rational attnf;
  Rational mttqf;
  ActionRange attnf_window;
  ActionRange mttqf_window;
  bool mttqf_defined = true;
  bool suspicious = false;
  Rational rank_score;
};

struct DetectOptions {
  std::size_t window_size = 100000;
  std::size_t pieces = 10;
  bool whole_history = false;
  FactorOptions factors;
  Thresholds thresholds;
  unsigned threads = 1;
};

// ACF and TANF are reported over the ATTNF window.
FactorReport detect_token(const DetectionContext& ctx, const DetectOptions& opts);

// One report per token with at least one transfer, in TokenId order, classified.
std::vector<FactorReport> detect_all(const Dataset& ds, const DetectOptions& opts);

bool is_suspicious(const FactorReport& r, const Thresholds& t);

// Sets `suspicious` on every report and returns the suspicious ones ranked
// by ATTNF x MTTQF, highest first, ties by TokenId.
std::vector<FactorReport> classify(std::vector<FactorReport>& reports, const Thresholds& t = {});

// All reports ranked as in classify().
void rank_reports(std::vector<FactorReport>& reports);

nlohmann::json to_json(const FactorReport& r);
nlohmann::json to_json(std::span<const FactorReport> reports);

// token,attnf,mttqf,acf,suspicious,rank_score,window_start,window_end (ATTNF window)
void write_report_csv(std::ostream& out, std::span<const FactorReport> reports);

}  // namespace eoscope
