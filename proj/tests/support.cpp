#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace eoscope::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("eoscope-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TransferAction transfer(const std::string& token, const std::string& from, const std::string& to,
                        const std::string& quantity, Timestamp time, const std::string& memo) {
  return TransferAction{"tx", time, parse_token_id(token), from, to, parse_quantity(quantity), memo};
}

IssueAction issue(const std::string& token, const std::string& issuer, const std::string& to,
                  const std::string& quantity, Timestamp time) {
  return IssueAction{"tx", time, parse_token_id(token), issuer, to, parse_quantity(quantity), ""};
}

CreateAction create(const std::string& token, const std::string& creator, const std::string& max_supply,
                    Timestamp time) {
  return CreateAction{"tx", time, parse_token_id(token), creator, parse_quantity(max_supply)};
}

AccountCreation account(const std::string& creator, const std::string& name, Timestamp time) {
  return AccountCreation{"tx", time, creator, name};
}

std::string quantity_text(std::int64_t mantissa, const std::string& symbol) {
  std::string frac = std::to_string(mantissa % 10000);
  frac.insert(0, 4 - frac.size(), '0');
  return std::to_string(mantissa / 10000) + "." + frac + " " + symbol;
}

Dataset World::to_dataset() const {
  Dataset ds;
  for (const auto& [creator, child] : creations) ds.add_account_creation(account(creator, child, 0));
  for (const auto& [token, amount] : issued) {
    TokenId id = parse_token_id(token);
    ds.add_issue(issue(token, id.contract, id.contract, quantity_text(amount, id.symbol), 0));
  }
  for (const auto& t : transfers) {
    ds.add_transfer(transfer(t.token, t.sender, t.receiver, quantity_text(t.amount, parse_token_id(t.token).symbol),
                             t.time));
  }
  ds.freeze();
  return ds;
}

World random_world(SplitMix64& rng, const WorldShape& shape) {
  World w;
  std::vector<std::string> tokens{kFocusToken};
  const std::size_t n_other = 1 + rng.below(4);
  for (std::size_t i = 0; i < n_other; ++i) {
    tokens.push_back(std::string("othercoin") + char('a' + i) + "@OT" + char('A' + i));
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    // Roughly one token in eight is never issued.
    if (rng.below(8) != 0) w.issued[tokens[i]] = 1000000000 + static_cast<std::int64_t>(rng.below(1000000000));
  }

  const std::size_t n_parents = 1 + rng.below(6);
  std::vector<std::vector<std::string>> pools(n_parents);
  std::vector<std::size_t> used(n_parents, 0);
  for (std::size_t p = 0; p < n_parents; ++p) {
    std::string parent = std::string("parent") + char('a' + p);
    const std::size_t n_children = 1 + rng.below(40);
    for (std::size_t c = 0; c < n_children; ++c) {
      std::string child = std::string("kid") + char('a' + p) + std::to_string(c);
      w.creations.emplace_back(parent, child);
      pools[p].push_back(child);
    }
  }

  const std::size_t n_senders = 1 + rng.below(shape.max_senders);
  std::vector<std::string> senders;
  for (std::size_t i = 0; i < n_senders; ++i) {
    std::size_t p = rng.below(n_parents + 1);
    if (p < n_parents && used[p] < pools[p].size()) {
      senders.push_back(pools[p][used[p]++]);
    } else {
      senders.push_back("solo" + std::to_string(i));
    }
  }

  const std::size_t n_focus = shape.focus_actions ? shape.focus_actions : 1 + rng.below(shape.max_actions);
  Timestamp clock = 1000;
  // Focus actions come in runs by one sender so windows see uneven populations.
  std::size_t run_sender = 0;
  for (std::size_t i = 0; i < n_focus; ++i) {
    if (rng.below(4) == 0) run_sender = rng.below(senders.size());
    const std::string& s = rng.below(3) == 0 ? senders[rng.below(senders.size())] : senders[run_sender];
    clock += static_cast<Timestamp>(rng.below(3));
    w.transfers.push_back({kFocusToken, s, "sinkacct", 1 + static_cast<std::int64_t>(rng.below(1000000)), clock});
  }
  for (const auto& s : senders) {
    const std::size_t extra = rng.below(6);
    for (std::size_t i = 0; i < extra; ++i) {
      const std::string& token = tokens[1 + rng.below(tokens.size() - 1)];
      w.transfers.push_back({token, s, "sinkacct", 1 + static_cast<std::int64_t>(rng.below(1000000)),
                             static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(clock) + 1))});
    }
  }
  for (std::size_t i = w.transfers.size(); i > 1; --i) std::swap(w.transfers[i - 1], w.transfers[rng.below(i)]);
  return w;
}

FactorOracle::FactorOracle(const World& world, const std::string& token) : token_(token) {
  for (const auto& [creator, child] : world.creations) {
    parent_[child] = creator;
    ++children_[creator];
  }
  for (const auto& t : world.transfers) {
    ++lifetime_count_[t.sender];
    auto issued = world.issued.find(t.token);
    if (issued != world.issued.end() && issued->second > 0) {
      lifetime_quantity_[t.sender] += Rational(mpz_class(std::to_string(t.amount)), mpz_class(std::to_string(issued->second)));
    }
    if (t.token == token) actions_.push_back(t);
  }
  for (auto& [_, q] : lifetime_quantity_) q.canonicalize();
  std::stable_sort(actions_.begin(), actions_.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  if (auto it = world.issued.find(token); it != world.issued.end()) issued_ = it->second;
}

std::set<std::string> FactorOracle::senders(std::size_t begin, std::size_t end) const {
  std::set<std::string> out;
  for (std::size_t i = begin; i < end; ++i) out.insert(actions_[i].sender);
  return out;
}

std::string FactorOracle::parent_key(const std::string& sender) const {
  auto it = parent_.find(sender);
  return it == parent_.end() ? "?" + sender : it->second;
}

Rational FactorOracle::acf(std::size_t begin, std::size_t end) const {
  std::set<std::string> s = senders(begin, end);
  std::set<std::string> parents;
  for (const auto& x : s) parents.insert(parent_key(x));
  Rational r(static_cast<long>(s.size()), static_cast<long>(parents.size()));
  r.canonicalize();
  return r;
}

Rational FactorOracle::anf(const std::string& sender, std::size_t begin, std::size_t end) const {
  long count = 0;
  for (std::size_t i = begin; i < end; ++i) count += actions_[i].sender == sender;
  Rational r(count, static_cast<long>(lifetime_count_.at(sender)));
  r.canonicalize();
  return r;
}

Rational FactorOracle::tanf(std::size_t begin, std::size_t end) const {
  Rational sum = 0;
  for (const auto& s : senders(begin, end)) sum += anf(s, begin, end);
  return sum;
}

Rational FactorOracle::attnf(std::size_t begin, std::size_t end) const {
  std::map<std::string, long> holders_per_parent;
  for (const auto& s : senders(begin, end)) ++holders_per_parent[parent_key(s)];
  Rational m_sum = 0;
  for (const auto& [parent, n] : holders_per_parent) {
    if (parent.starts_with("?")) {
      m_sum += n;
    } else {
      Rational m(static_cast<long>(children_.at(parent)), n);
      m.canonicalize();
      m_sum += m;
    }
  }
  return tanf(begin, end) / m_sum;
}

Rational FactorOracle::qua(const std::string& sender, std::size_t begin, std::size_t end) const {
  if (issued_ <= 0) throw std::logic_error("qua on a never-issued token");
  auto lifetime = lifetime_quantity_.find(sender);
  if (lifetime == lifetime_quantity_.end() || lifetime->second == 0) return 0;
  mpz_class moved = 0;
  for (std::size_t i = begin; i < end; ++i) {
    if (actions_[i].sender == sender) moved += mpz_class(std::to_string(actions_[i].amount));
  }
  Rational here(moved, mpz_class(std::to_string(issued_)));
  here.canonicalize();
  Rational r = here / lifetime->second;
  r.canonicalize();
  return r;
}

Rational FactorOracle::ttqf(const std::set<std::string>& group, std::size_t begin, std::size_t end) const {
  Rational sum = 0;
  for (const auto& s : group) sum += qua(s, begin, end);
  return sum;
}

std::optional<Rational> FactorOracle::mttqf(std::size_t begin, std::size_t end) const {
  if (issued_ <= 0) return std::nullopt;
  std::map<std::string, std::set<std::string>> groups;
  for (const auto& s : senders(begin, end)) groups[parent_key(s)].insert(s);
  std::optional<Rational> best;
  for (const auto& [_, members] : groups) {
    Rational t = ttqf(members, begin, end);
    if (!best || t > *best) best = t;
  }
  return best;
}

Rational FactorOracle::factor(FactorKind kind, std::size_t begin, std::size_t end) const {
  if (kind == FactorKind::attnf) return attnf(begin, end);
  return mttqf(begin, end).value_or(Rational(0));
}

std::pair<std::size_t, std::size_t> FactorOracle::best_window(std::size_t window, std::size_t pieces,
                                                               FactorKind kind) const {
  const std::size_t n = actions_.size();
  if (n < window) return {0, n};
  const std::size_t piece = window / pieces;
  const std::size_t count = n / piece;
  std::vector<Rational> score(count);
  for (std::size_t i = 0; i < count; ++i) score[i] = factor(kind, i * piece, (i + 1) * piece);
  std::optional<Rational> best;
  std::size_t best_start = 0;
  for (std::size_t s = 0; s + pieces <= count; ++s) {
    Rational sum = 0;
    for (std::size_t j = s; j < s + pieces; ++j) sum += score[j];
    if (!best || sum > *best) {
      best = sum;
      best_start = s;
    }
  }
  const std::size_t start = best_start * piece;
  return {start, std::min(start + window, n)};
}

std::map<std::string, double> dense_pagerank(const TransferGraph& g, double damping) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      w[i][j] = static_cast<double>(g.weight(static_cast<TransferGraph::NodeId>(i), static_cast<TransferGraph::NodeId>(j)));
      out[i] += w[i][j];
    }
  }
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  for (int iter = 0; iter < 100000; ++iter) {
    std::vector<double> next(n, (1.0 - damping) / static_cast<double>(n));
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out[i] == 0.0) dangling += x[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      double in = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (out[i] > 0.0) in += x[i] * w[i][j] / out[i];
      }
      next[j] += damping * (in + dangling / static_cast<double>(n));
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff += std::abs(next[i] - x[i]);
    x = std::move(next);
    if (diff < 1e-15) break;
  }
  std::map<std::string, double> result;
  for (std::size_t i = 0; i < n; ++i) result[g.name(static_cast<TransferGraph::NodeId>(i))] = x[i];
  return result;
}

}  // namespace eoscope::testing
