#include "eoscope/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

namespace eoscope {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Creation graphs

namespace {

template <typename LeftFn, typename RightFn>
BipartiteCreationGraph build_creation_graph(const Dataset& ds, LeftFn left_of, RightFn right_of) {
  BipartiteCreationGraph g;
  for (const CreateRecord& c : ds.creates()) {
    std::string left = left_of(c);
    std::string right = right_of(c);
    g.left_nodes.insert(left);
    g.right_nodes.insert(right);
    g.edges.push_back(CreationEdge{std::move(left), std::move(right), c.time});
  }
  return g;
}

}  // namespace

BipartiteCreationGraph build_tcg(const Dataset& ds) {
  return build_creation_graph(
      ds, [&](const CreateRecord& c) { return ds.accounts().name(c.creator); },
      [&](const CreateRecord& c) { return ds.tokens()[c.token].id.symbol; });
}

BipartiteCreationGraph build_tccg(const Dataset& ds) {
  return build_creation_graph(
      ds, [&](const CreateRecord& c) { return ds.tokens()[c.token].id.contract; },
      [&](const CreateRecord& c) { return ds.tokens()[c.token].id.to_string(); });
}

DegreeHistogram degree_distribution(const BipartiteCreationGraph& g, Side side) {
  std::map<std::string_view, std::uint64_t> degree;
  const auto& nodes = side == Side::left ? g.left_nodes : g.right_nodes;
  for (const auto& n : nodes) degree[n] = 0;
  for (const auto& e : g.edges) ++degree[side == Side::left ? e.left : e.right];
  DegreeHistogram hist;
  for (const auto& [_, d] : degree) ++hist[d];
  return hist;
}

// ---------------------------------------------------------------------------
// Holding graph

HoldingGraph build_thg(const Dataset& ds) {
  HoldingGraph g;
  const auto& tokens = ds.tokens();
  auto key = [](TokenIndex t, AccountIndex a) { return (std::uint64_t{t} << 32) | a; };

  std::unordered_map<std::uint64_t, Mantissa> balance;
  std::vector<std::uint64_t> negative_events(tokens.size(), 0);

  auto issues = ds.issues();
  auto transfers = ds.transfers();
  std::size_t i = 0, j = 0;
  while (i < issues.size() || j < transfers.size()) {
    bool take_issue = j == transfers.size() || (i < issues.size() && issues[i].time <= transfers[j].time);
    if (take_issue) {
      const IssueRecord& r = issues[i++];
      balance[key(r.token, r.to)] += r.amount;
    } else {
      const TransferRecord& r = transfers[j++];
      Mantissa& from = balance[key(r.token, r.from)];
      from -= r.amount;
      if (from < 0) ++negative_events[r.token];
      balance[key(r.token, r.to)] += r.amount;
    }
  }

  std::vector<TokenLedger> ledgers(tokens.size());
  std::vector<bool> active(tokens.size(), false);
  for (const auto& [k, b] : balance) {
    auto t = static_cast<TokenIndex>(k >> 32);
    active[t] = true;
    if (b > 0) ledgers[t].positive_total += b;
    if (b < 0) ledgers[t].negative_total += b;
  }

  for (TokenIndex t = 0; t < tokens.size(); ++t) {
    TokenLedger& ledger = ledgers[t];
    ledger.issued = tokens[t].issue_total;
    ledger.negative_events = negative_events[t];
    const std::string id = tokens[t].id.to_string();
    if (ledger.negative_events > 0) {
      g.warnings.push_back(id + ": " + std::to_string(ledger.negative_events) +
                           " transfers left the sender with a negative balance");
    }
    if (ledger.issued == 0) {
      if (active[t]) g.warnings.push_back(id + ": never issued; omitted from holding graph");
    } else if (ledger.negative_total < 0) {
      g.warnings.push_back(id + ": negative final balance; omitted from holding graph");
    } else {
      ledger.in_graph = true;
    }
    if (active[t] || ledger.issued != 0) g.ledgers.emplace(tokens[t].id, ledger);
  }

  for (const auto& [k, b] : balance) {
    auto t = static_cast<TokenIndex>(k >> 32);
    auto a = static_cast<AccountIndex>(k & 0xffffffffu);
    if (b <= 0 || !ledgers[t].in_graph) continue;
    g.edges.push_back(HoldingEdge{ds.accounts().name(a), tokens[t].id, b, ledgers[t].issued});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const HoldingEdge& x, const HoldingEdge& y) {
    return std::tie(x.token, x.holder) < std::tie(y.token, y.holder);
  });
  for (const auto& e : g.edges) {
    g.holders.insert(e.holder);
    g.tokens.insert(e.token);
  }
  return g;
}

DegreeHistogram degree_distribution(const HoldingGraph& g, Side side) {
  DegreeHistogram hist;
  if (side == Side::left) {
    std::map<std::string_view, std::uint64_t> held;
    for (const auto& h : g.holders) held[h] = 0;
    for (const auto& e : g.edges) ++held[e.holder];
    for (const auto& [_, d] : held) ++hist[d];
  } else {
    std::map<TokenId, std::uint64_t> holders;
    for (const auto& t : g.tokens) holders[t] = 0;
    for (const auto& e : g.edges) ++holders[e.token];
    for (const auto& [_, d] : holders) ++hist[d];
  }
  return hist;
}

// ---------------------------------------------------------------------------
// Transfer graph

TransferGraph::NodeId TransferGraph::add_node(std::string_view name) {
  NodeId id = names_.intern(name);
  if (id == out_weight_.size()) {
    out_weight_.push_back(0);
    in_weight_.push_back(0);
    out_degree_.push_back(0);
    in_degree_.push_back(0);
  }
  return id;
}

void TransferGraph::add_edge(std::string_view from, std::string_view to, std::uint64_t weight) {
  NodeId f = add_node(from);
  NodeId t = add_node(to);
  add_edge(f, t, weight);
}

void TransferGraph::add_edge(NodeId from, NodeId to, std::uint64_t weight) {
  if (from >= node_count() || to >= node_count()) throw std::out_of_range("unknown node id");
  if (weight == 0) return;
  auto [it, inserted] = weights_.try_emplace(key(from, to), 0);
  it->second += weight;
  if (inserted) {
    ++out_degree_[from];
    ++in_degree_[to];
  }
  out_weight_[from] += weight;
  in_weight_[to] += weight;
  total_weight_ += weight;
}

std::uint64_t TransferGraph::weight(NodeId from, NodeId to) const {
  auto it = weights_.find(key(from, to));
  return it == weights_.end() ? 0 : it->second;
}

std::vector<TransferGraph::Edge> TransferGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(weights_.size());
  for (const auto& [k, w] : weights_) {
    out.push_back(Edge{static_cast<NodeId>(k >> 32), static_cast<NodeId>(k & 0xffffffffu), w});
  }
  std::sort(out.begin(), out.end(), [this](const Edge& a, const Edge& b) {
    int c = name(a.from).compare(name(b.from));
    if (c != 0) return c < 0;
    return name(a.to) < name(b.to);
  });
  return out;
}

std::map<std::pair<std::string, std::string>, std::uint64_t> TransferGraph::named_edges() const {
  std::map<std::pair<std::string, std::string>, std::uint64_t> out;
  for (const auto& [k, w] : weights_) {
    out[{name(static_cast<NodeId>(k >> 32)), name(static_cast<NodeId>(k & 0xffffffffu))}] = w;
  }
  return out;
}

TransferGraph build_ttg(const Dataset& ds, const std::set<TokenId>* token_filter) {
  std::vector<bool> include;
  if (token_filter) {
    include.assign(ds.tokens().size(), false);
    for (const auto& id : *token_filter) {
      if (auto t = ds.find_token(id)) include[*t] = true;
    }
  }
  TransferGraph g;
  // Node ids follow first appearance in time order.
  std::vector<std::int64_t> node_of(ds.accounts().size(), -1);
  auto node = [&](AccountIndex a) {
    if (node_of[a] < 0) node_of[a] = g.add_node(ds.accounts().name(a));
    return static_cast<TransferGraph::NodeId>(node_of[a]);
  };
  for (const TransferRecord& r : ds.transfers()) {
    if (token_filter && !include[r.token]) continue;
    auto f = node(r.from);
    auto t = node(r.to);
    g.add_edge(f, t, 1);
  }
  return g;
}

TransferGraph build_cttg(const TransferGraph& ttg, std::size_t k, Warnings* warnings) {
  using NodeId = TransferGraph::NodeId;
  std::vector<NodeId> order(ttg.node_count());
  std::iota(order.begin(), order.end(), NodeId{0});
  if (k > order.size() && warnings) {
    warnings->push_back("k=" + std::to_string(k) + " exceeds node count " + std::to_string(order.size()) +
                        "; using the whole graph");
  }
  k = std::min(k, order.size());
  auto score = [&](NodeId n) { return ttg.in_weight(n) + ttg.out_weight(n); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](NodeId a, NodeId b) {
                      if (score(a) != score(b)) return score(a) > score(b);
                      return ttg.name(a) < ttg.name(b);
                    });
  order.resize(k);

  std::vector<NodeId> selected = order;
  std::sort(selected.begin(), selected.end(), [&](NodeId a, NodeId b) { return ttg.name(a) < ttg.name(b); });

  TransferGraph sub;
  for (NodeId n : selected) sub.add_node(ttg.name(n));
  for (NodeId a : selected) {
    for (NodeId b : selected) {
      if (auto w = ttg.weight(a, b)) sub.add_edge(ttg.name(a), ttg.name(b), w);
    }
  }
  return sub;
}

DegreeHistogram degree_distribution(const TransferGraph& g, Direction direction, bool weighted) {
  DegreeHistogram hist;
  for (TransferGraph::NodeId n = 0; n < g.node_count(); ++n) {
    std::uint64_t in = weighted ? g.in_weight(n) : g.in_degree(n);
    std::uint64_t out = weighted ? g.out_weight(n) : g.out_degree(n);
    switch (direction) {
      case Direction::in: ++hist[in]; break;
      case Direction::out: ++hist[out]; break;
      case Direction::total: ++hist[in + out]; break;
    }
  }
  return hist;
}

PageRankResult pagerank(const TransferGraph& g, double damping, double tol, std::size_t max_iter) {
  const std::size_t n = g.node_count();
  if (n == 0) throw std::invalid_argument("pagerank of an empty graph");

  // Incoming adjacency in CSR form with transition probabilities.
  auto edges = g.edges();
  std::vector<std::size_t> offset(n + 1, 0);
  for (const auto& e : edges) ++offset[e.to + 1];
  std::partial_sum(offset.begin(), offset.end(), offset.begin());
  std::vector<TransferGraph::NodeId> source(edges.size());
  std::vector<double> prob(edges.size());
  std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
  for (const auto& e : edges) {
    std::size_t slot = fill[e.to]++;
    source[slot] = e.from;
    prob[slot] = static_cast<double>(e.weight) / static_cast<double>(g.out_weight(e.from));
  }

  PageRankResult result;
  std::vector<double> rank(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  const double base = (1.0 - damping) / static_cast<double>(n);
  for (result.iterations = 0; result.iterations < max_iter;) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (g.out_weight(static_cast<TransferGraph::NodeId>(v)) == 0) dangling += rank[v];
    }
    const double spread = base + damping * dangling / static_cast<double>(n);
    for (std::size_t v = 0; v < n; ++v) {
      double sum = 0.0;
      for (std::size_t s = offset[v]; s < offset[v + 1]; ++s) sum += rank[source[s]] * prob[s];
      next[v] = spread + damping * sum;
    }
    double total = std::accumulate(next.begin(), next.end(), 0.0);
    double delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] /= total;
      delta += std::abs(next[v] - rank[v]);
    }
    rank.swap(next);
    ++result.iterations;
    if (delta < tol) {
      result.converged = true;
      break;
    }
  }
  result.scores = std::move(rank);
  return result;
}

std::vector<MutualPair> mutual_pairs(const TransferGraph& g, std::uint64_t min_weight) {
  std::vector<MutualPair> pairs;
  for (const auto& e : g.edges()) {
    if (!(g.name(e.from) < g.name(e.to))) continue;
    std::uint64_t back = g.weight(e.to, e.from);
    if (back == 0 || std::min(e.weight, back) < min_weight) continue;
    pairs.push_back(MutualPair{g.name(e.from), g.name(e.to), e.weight, back});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const MutualPair& x, const MutualPair& y) {
    return std::min(x.w_ab, x.w_ba) > std::min(y.w_ab, y.w_ba);
  });
  return pairs;
}

DensityReport subgraph_density(const TransferGraph& g, const std::set<std::string>& nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("density needs at least two nodes");
  std::vector<TransferGraph::NodeId> ids;
  for (const auto& n : nodes) {
    auto id = g.find(n);
    if (!id) throw std::invalid_argument("node '" + n + "' is not in the graph");
    ids.push_back(*id);
  }
  DensityReport r;
  for (auto a : ids) {
    for (auto b : ids) {
      if (a == b) continue;
      if (auto w = g.weight(a, b)) {
        ++r.edge_count;
        r.total_weight += w;
      }
    }
  }
  r.possible_edges = static_cast<std::uint64_t>(ids.size()) * (ids.size() - 1);
  r.density = static_cast<double>(r.edge_count) / static_cast<double>(r.possible_edges);
  return r;
}

// ---------------------------------------------------------------------------
// Account-creation forest

bool AccountCreationForest::add_link(const std::string& creator, const std::string& child, Timestamp time,
                                     Warnings* warnings) {
  auto reject = [&](const std::string& why) {
    if (warnings) warnings->push_back("account creation " + creator + " -> " + child + " skipped: " + why);
    return false;
  };
  if (creator == child) return reject("self-creation");
  if (parent_.count(child)) return reject("account already has a creator");
  for (const std::string* cur = &creator;;) {
    if (*cur == child) return reject("would create a cycle");
    auto it = parent_.find(*cur);
    if (it == parent_.end()) break;
    cur = &it->second.creator;
  }
  nodes_.insert(creator);
  nodes_.insert(child);
  parent_.emplace(child, Link{creator, time});
  children_[creator].push_back(child);
  return true;
}

const AccountCreationForest::Link* AccountCreationForest::parent(const std::string& name) const {
  auto it = parent_.find(name);
  return it == parent_.end() ? nullptr : &it->second;
}

std::vector<std::string> AccountCreationForest::roots() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (!parent_.count(n)) out.push_back(n);
  }
  return out;
}

const std::vector<std::string>& AccountCreationForest::children(const std::string& name) const {
  static const std::vector<std::string> kNone;
  auto it = children_.find(name);
  return it == children_.end() ? kNone : it->second;
}

std::size_t AccountCreationForest::depth(const std::string& name) const {
  std::size_t d = 0;
  for (const Link* link = parent(name); link; link = parent(link->creator)) {
    if (++d > nodes_.size()) throw std::logic_error("cycle in account-creation forest");
  }
  return d;
}

AccountCreationForest build_acg(const Dataset& ds, Warnings* warnings) {
  AccountCreationForest forest;
  for (const AccountRecord& r : ds.account_creations()) {
    forest.add_link(ds.accounts().name(r.creator), ds.accounts().name(r.name), r.time, warnings);
  }
  return forest;
}

DegreeHistogram degree_distribution(const AccountCreationForest& g, Direction direction) {
  DegreeHistogram hist;
  for (const auto& n : g.nodes()) {
    std::uint64_t in = g.parent(n) ? 1 : 0;
    std::uint64_t out = g.children_count(n);
    switch (direction) {
      case Direction::in: ++hist[in]; break;
      case Direction::out: ++hist[out]; break;
      case Direction::total: ++hist[in + out]; break;
    }
  }
  return hist;
}

// ---------------------------------------------------------------------------
// Token metrics

std::vector<TokenStats> token_stats(const Dataset& ds) {
  const auto& tokens = ds.tokens();
  std::vector<TokenStats> stats(tokens.size());
  std::unordered_set<std::uint64_t> seen;
  auto touch = [&](TokenIndex t, AccountIndex a) {
    if (seen.insert((std::uint64_t{t} << 32) | a).second) ++stats[t].n_holders;
  };
  for (const auto& r : ds.transfers()) {
    ++stats[r.token].activeness;
    touch(r.token, r.from);
    touch(r.token, r.to);
  }
  for (const auto& r : ds.issues()) touch(r.token, r.to);
  for (TokenIndex t = 0; t < tokens.size(); ++t) {
    stats[t].token = tokens[t].id;
    stats[t].issue_total = ds.issue_total(t);
  }
  std::sort(stats.begin(), stats.end(), [](const TokenStats& a, const TokenStats& b) { return a.token < b.token; });
  return stats;
}

ConcentrationStats concentration_stats(std::span<const TokenStats> stats, std::uint64_t below, double top_fraction) {
  if (stats.empty()) throw std::invalid_argument("concentration of an empty token list");
  const double n = static_cast<double>(stats.size());
  ConcentrationStats c;
  std::uint64_t never = 0, under = 0, total = 0;
  std::vector<const TokenStats*> order;
  for (const auto& s : stats) {
    never += s.activeness == 0;
    under += s.activeness < below;
    total += s.activeness;
    order.push_back(&s);
  }
  c.pct_never_transferred = static_cast<double>(never) / n;
  c.pct_below = static_cast<double>(under) / n;

  std::sort(order.begin(), order.end(), [](const TokenStats* a, const TokenStats* b) {
    if (a->activeness != b->activeness) return a->activeness > b->activeness;
    return a->token < b->token;
  });
  // The epsilon keeps 0.01 * 100 from rounding up to 2.
  auto top = static_cast<std::size_t>(std::ceil(top_fraction * n - 1e-9));
  top = std::min(top, order.size());
  std::uint64_t top_total = 0;
  for (std::size_t i = 0; i < top; ++i) top_total += order[i]->activeness;
  c.top_share = total == 0 ? 0.0 : static_cast<double>(top_total) / static_cast<double>(total);
  return c;
}

PowerLawFit fit_power_law(const std::map<double, double>& points) {
  std::vector<std::pair<long double, long double>> logs;
  for (const auto& [x, y] : points) {
    if (x > 0 && y > 0) logs.emplace_back(std::log(static_cast<long double>(x)), std::log(static_cast<long double>(y)));
  }
  if (logs.size() < 2) throw FitError("power-law fit needs at least two points with x, y > 0");

  const long double n = static_cast<long double>(logs.size());
  long double mx = 0, my = 0;
  for (const auto& [lx, ly] : logs) {
    mx += lx;
    my += ly;
  }
  mx /= n;
  my /= n;
  long double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  const long double slope = sxy / sxx;
  long double ss_res = 0;
  for (const auto& [lx, ly] : logs) {
    long double r = ly - (my + slope * (lx - mx));
    ss_res += r * r;
  }
  PowerLawFit fit;
  fit.n_points = logs.size();
  fit.beta = static_cast<double>(-slope);
  // A flat line explains a constant series completely.
  fit.r_squared = syy == 0 ? 1.0 : static_cast<double>(std::clamp(1.0L - ss_res / syy, 0.0L, 1.0L));
  return fit;
}

PowerLawFit fit_power_law(const DegreeHistogram& hist) {
  std::map<double, double> points;
  for (const auto& [x, y] : hist) points[static_cast<double>(x)] = static_cast<double>(y);
  return fit_power_law(points);
}

void MemoCounter::add(std::string_view memo) {
  std::string word;
  auto flush = [&] {
    if (word.size() >= 2) ++counts_[word];
    word.clear();
  };
  for (char ch : memo) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
}

std::vector<std::pair<std::string, std::uint64_t>> MemoCounter::top(std::size_t n) const {
  std::vector<std::pair<std::string, std::uint64_t>> out(counts_.begin(), counts_.end());
  auto cmp = [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  n = std::min(n, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), cmp);
  out.resize(n);
  return out;
}

std::vector<std::pair<std::string, std::uint64_t>> memo_word_frequencies(const Dataset& ds, std::size_t top_n) {
  if (!ds.retains_text()) throw std::logic_error("memo frequencies need a dataset that retains text");
  MemoCounter counter;
  for (const auto& r : ds.transfers()) counter.add(ds.memo(r.text));
  return counter.top(top_n);
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_edge_csv(std::ostream& out, const BipartiteCreationGraph& g) {
  out << "src,dst,weight,timestamp\n";
  for (const auto& e : g.edges) out << e.left << ',' << e.right << ",1," << format_timestamp(e.time) << '\n';
}

void write_edge_csv(std::ostream& out, const HoldingGraph& g) {
  out << "src,dst,weight\n";
  for (const auto& e : g.edges) out << e.holder << ',' << e.token.to_string() << ',' << format_double(e.share()) << '\n';
}

void write_edge_csv(std::ostream& out, const TransferGraph& g) {
  out << "src,dst,weight\n";
  for (const auto& e : g.edges()) out << g.name(e.from) << ',' << g.name(e.to) << ',' << e.weight << '\n';
}

void write_edge_csv(std::ostream& out, const AccountCreationForest& g) {
  out << "src,dst,weight,timestamp\n";
  for (const auto& n : g.nodes()) {
    if (const auto* link = g.parent(n)) out << link->creator << ',' << n << ",1," << format_timestamp(link->time) << '\n';
  }
}

void write_distribution_csv(std::ostream& out, const DegreeHistogram& hist) {
  out << "x,y\n";
  for (const auto& [x, y] : hist) out << x << ',' << y << '\n';
}

json to_json(const DegreeHistogram& hist) {
  json arr = json::array();
  for (const auto& [x, y] : hist) arr.push_back(json{{"degree", x}, {"count", y}});
  return arr;
}

json summary_json(const BipartiteCreationGraph& g) {
  return json{{"left_nodes", g.left_nodes.size()},
              {"right_nodes", g.right_nodes.size()},
              {"edges", g.edges.size()},
              {"left_degree", to_json(degree_distribution(g, Side::left))},
              {"right_degree", to_json(degree_distribution(g, Side::right))}};
}

json summary_json(const HoldingGraph& g) {
  return json{{"holders", g.holders.size()},
              {"tokens", g.tokens.size()},
              {"edges", g.edges.size()},
              {"holder_degree", to_json(degree_distribution(g, Side::left))},
              {"token_degree", to_json(degree_distribution(g, Side::right))},
              {"warnings", g.warnings}};
}

json summary_json(const TransferGraph& g) {
  return json{{"nodes", g.node_count()},
              {"edges", g.edge_count()},
              {"total_weight", g.total_weight()},
              {"in_degree", to_json(degree_distribution(g, Direction::in))},
              {"out_degree", to_json(degree_distribution(g, Direction::out))}};
}

json summary_json(const AccountCreationForest& g) {
  return json{{"nodes", g.nodes().size()},
              {"edges", g.link_count()},
              {"roots", g.roots().size()},
              {"out_degree", to_json(degree_distribution(g, Direction::out))}};
}

}  // namespace eoscope
