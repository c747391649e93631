#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eoscope/ingest.hpp"
#include "eoscope/model.hpp"
#include "json.hpp"

namespace eoscope {

// Non-fatal findings from builders and metrics.
using Warnings = std::vector<std::string>;

// Degree histogram: degree -> number of nodes with that degree.
using DegreeHistogram = std::map<std::uint64_t, std::uint64_t>;

enum class Side { left, right };
enum class Direction { in, out, total };

// ---------------------------------------------------------------------------
// Creation graphs (creator -> symbol, contract -> token)

struct CreationEdge {
  std::string left;
  std::string right;
  Timestamp time;
};

struct BipartiteCreationGraph {
  std::set<std::string> left_nodes;
  std::set<std::string> right_nodes;
  std::vector<CreationEdge> edges;  // one per create action, in time order
};

// Creators on the left, bare symbols on the right. Distinct tokens sharing a
// symbol collapse into one right node.
BipartiteCreationGraph build_tcg(const Dataset& ds);

// Contracts on the left, full contract@symbol ids on the right.
BipartiteCreationGraph build_tccg(const Dataset& ds);

DegreeHistogram degree_distribution(const BipartiteCreationGraph& g, Side side);

// ---------------------------------------------------------------------------
// Holding graph

struct HoldingEdge {
  std::string holder;
  TokenId token;
  Mantissa balance;
  Mantissa issued;

  double share() const { return static_cast<double>(balance) / static_cast<double>(issued); }
  Rational exact_share() const { return to_rational(balance, issued); }
};

// End-of-replay totals for one token. issued == positive_total + negative_total.
struct TokenLedger {
  Mantissa issued = 0;
  Mantissa positive_total = 0;
  Mantissa negative_total = 0;  // sum of negative final balances, <= 0
  std::uint64_t negative_events = 0;  // transfers that drove a balance below zero
  bool in_graph = false;
};

struct HoldingGraph {
  std::set<std::string> holders;
  std::set<TokenId> tokens;
  std::vector<HoldingEdge> edges;  // sorted by (token, holder)
  std::map<TokenId, TokenLedger> ledgers;
  Warnings warnings;
};

/// Replays issues (credit `to`) and transfers (debit `from`, credit `to`) in
/// block-time order, issues first on ties, and weights each positive final
/// balance by the token's cumulative issued amount. Tokens that were never
/// issued, or that end with a negative balance anywhere, are left out of the
/// graph but keep their ledger entry.
HoldingGraph build_thg(const Dataset& ds);

DegreeHistogram degree_distribution(const HoldingGraph& g, Side side);

// ---------------------------------------------------------------------------
// Transfer graph

class TransferGraph {
 public:
  using NodeId = std::uint32_t;

  struct Edge {
    NodeId from;
    NodeId to;
    std::uint64_t weight;
  };

  NodeId add_node(std::string_view name);
  void add_edge(std::string_view from, std::string_view to, std::uint64_t weight = 1);
  void add_edge(NodeId from, NodeId to, std::uint64_t weight = 1);

  std::size_t node_count() const noexcept { return names_.size(); }
  std::size_t edge_count() const noexcept { return weights_.size(); }
  std::uint64_t total_weight() const noexcept { return total_weight_; }

  const std::string& name(NodeId id) const { return names_.name(id); }
  std::optional<NodeId> find(std::string_view name) const { return names_.find(name); }

  std::uint64_t weight(NodeId from, NodeId to) const;
  std::uint64_t out_weight(NodeId id) const { return out_weight_[id]; }
  std::uint64_t in_weight(NodeId id) const { return in_weight_[id]; }
  std::uint64_t out_degree(NodeId id) const { return out_degree_[id]; }
  std::uint64_t in_degree(NodeId id) const { return in_degree_[id]; }

  // Sorted by (name(from), name(to)).
  std::vector<Edge> edges() const;

  // Same content, keyed by names; handy for comparing graphs.
  std::map<std::pair<std::string, std::string>, std::uint64_t> named_edges() const;

 private:
  static std::uint64_t key(NodeId from, NodeId to) { return (std::uint64_t{from} << 32) | to; }

  NameTable names_;
  std::unordered_map<std::uint64_t, std::uint64_t> weights_;
  std::vector<std::uint64_t> out_weight_, in_weight_, out_degree_, in_degree_;
  std::uint64_t total_weight_ = 0;
};

// Edge weight = number of transfer actions from -> to, over all tokens or
// only those in `token_filter`.
TransferGraph build_ttg(const Dataset& ds, const std::set<TokenId>* token_filter = nullptr);

// Subgraph induced by the k accounts with the largest in+out weight; ties
// go to the lexicographically smaller name.
TransferGraph build_cttg(const TransferGraph& ttg, std::size_t k = 14, Warnings* warnings = nullptr);

DegreeHistogram degree_distribution(const TransferGraph& g, Direction direction, bool weighted = false);

struct PageRankResult {
  std::vector<double> scores;  // indexed by NodeId
  std::size_t iterations = 0;
  bool converged = false;
};

// Weighted PageRank; dangling mass is spread uniformly. Stops when the L1
// change between iterates drops below `tol`.
PageRankResult pagerank(const TransferGraph& g, double damping = 0.85, double tol = 1e-10,
                        std::size_t max_iter = 200);

struct MutualPair {
  std::string a;  // a < b
  std::string b;
  std::uint64_t w_ab;
  std::uint64_t w_ba;
};

// Pairs trading in both directions with min(w_ab, w_ba) >= min_weight,
// strongest first.
std::vector<MutualPair> mutual_pairs(const TransferGraph& g, std::uint64_t min_weight);

struct DensityReport {
  std::uint64_t edge_count = 0;
  std::uint64_t possible_edges = 0;
  double density = 0.0;
  std::uint64_t total_weight = 0;
};

// Self-loops are not counted. Throws std::invalid_argument on fewer than two
// nodes or a name not in the graph.
DensityReport subgraph_density(const TransferGraph& g, const std::set<std::string>& nodes);

// ---------------------------------------------------------------------------
// Account-creation forest

class AccountCreationForest {
 public:
  struct Link {
    std::string creator;
    Timestamp time;
  };

  // Rejects self-creation, a second parent, and links that would close a cycle.
  bool add_link(const std::string& creator, const std::string& child, Timestamp time, Warnings* warnings = nullptr);

  const std::set<std::string>& nodes() const noexcept { return nodes_; }
  std::size_t link_count() const noexcept { return parent_.size(); }
  const Link* parent(const std::string& name) const;
  std::vector<std::string> roots() const;
  const std::vector<std::string>& children(const std::string& name) const;
  std::size_t children_count(const std::string& name) const { return children(name).size(); }

  // Number of parent links between `name` and its root.
  std::size_t depth(const std::string& name) const;

 private:
  std::set<std::string> nodes_;
  std::unordered_map<std::string, Link> parent_;
  std::unordered_map<std::string, std::vector<std::string>> children_;
};

AccountCreationForest build_acg(const Dataset& ds, Warnings* warnings = nullptr);

// in: 0 or 1 (has a recorded creator); out: children created.
DegreeHistogram degree_distribution(const AccountCreationForest& g, Direction direction);

// ---------------------------------------------------------------------------
// Token-level metrics

struct TokenStats {
  TokenId token;
  std::uint64_t activeness = 0;  // transfer actions
  std::uint64_t n_holders = 0;   // distinct transfer parties and issue recipients
  Quantity issue_total;
};

// One entry per token in the dataset, in TokenId order.
std::vector<TokenStats> token_stats(const Dataset& ds);

struct ConcentrationStats {
  double pct_never_transferred = 0.0;
  double pct_below = 0.0;
  double top_share = 0.0;
};

// pct_below counts activeness < below; top_share is the fraction of all
// transfer actions held by the ceil(top_fraction * n) most active tokens.
// Throws std::invalid_argument on an empty list.
ConcentrationStats concentration_stats(std::span<const TokenStats> stats, std::uint64_t below = 100,
                                       double top_fraction = 0.01);

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PowerLawFit {
  double beta = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

// Ordinary least squares of log y on log x over entries with x, y > 0.
PowerLawFit fit_power_law(const std::map<double, double>& points);
PowerLawFit fit_power_law(const DegreeHistogram& hist);

class MemoCounter {
 public:
  // Lowercases ASCII, splits on anything that is not an ASCII letter, digit or
  // a UTF-8 byte, and drops one-byte words.
  void add(std::string_view memo);

  // Highest counts first, ties in lexicographic order.
  std::vector<std::pair<std::string, std::uint64_t>> top(std::size_t n) const;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
};

// Requires a dataset that retains text.
std::vector<std::pair<std::string, std::uint64_t>> memo_word_frequencies(const Dataset& ds, std::size_t top_n);

// ---------------------------------------------------------------------------
// Export

void write_edge_csv(std::ostream& out, const BipartiteCreationGraph& g);
void write_edge_csv(std::ostream& out, const HoldingGraph& g);
void write_edge_csv(std::ostream& out, const TransferGraph& g);
void write_edge_csv(std::ostream& out, const AccountCreationForest& g);

void write_distribution_csv(std::ostream& out, const DegreeHistogram& hist);

nlohmann::json to_json(const DegreeHistogram& hist);
nlohmann::json summary_json(const BipartiteCreationGraph& g);
nlohmann::json summary_json(const HoldingGraph& g);
nlohmann::json summary_json(const TransferGraph& g);
nlohmann::json summary_json(const AccountCreationForest& g);

}  // namespace eoscope
