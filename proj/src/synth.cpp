#include "eoscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "eoscope/ingest.hpp"

namespace eoscope {

using nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

SplitMix64 SplitMix64::substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t entity) {
  return SplitMix64(mix(seed + mix(stream + 0x9e3779b97f4a7c15ULL * (mix(entity) + 1))));
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix(state_);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bound must be positive");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

std::int64_t SplitMix64::between(std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

void ScenarioSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("scenario: ") + what);
  };
  require(wallet_participation_rate >= 0.0 && wallet_participation_rate <= 1.0,
          "wallet participation rate must lie in [0, 1]");
  require(n_organic_tokens <= 26 * 26 * 26, "at most 17576 organic tokens");
  require(n_manipulated_tokens <= 999, "at most 999 manipulated tokens");
  require(manipulator_children <= 99999, "at most 99999 bots per manipulator");
  require(n_wallets <= 99, "at most 99 wallets");
  require(wallet_children <= 99999, "at most 99999 children per wallet");
  require(organic_users <= 999999, "at most 999999 organic users");
  require(burst_span_ms > 0, "burst span must be positive");
  require(time_span_ms > 3 * 3600 * 1000 + burst_span_ms, "time span too short for setup plus one burst");
  require(!fixed_burst_quantity || *fixed_burst_quantity > 0, "fixed burst quantity must be positive");
}

// ---------------------------------------------------------------------------

namespace {

constexpr unsigned kPrecision = 4;
constexpr Mantissa kMaxOrganicAmount = 1000000;  // 100.0000
constexpr const char* kSystemAccount = "eosio";
constexpr std::int64_t kHourMs = 3600 * 1000;

const char* const kMemoWords[] = {"transfer", "payment", "thanks",  "deposit", "withdraw", "game",
                                  "bet",      "reward",  "dividend", "airdrop", "refund",   "order",
                                  "trade",    "swap",    "stake",    "gift",    "salary",   "invoice"};

std::string padded(std::uint64_t n, int width) {
  std::string s = std::to_string(n);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

// Bijective base 26: 0 -> A, 25 -> Z, 26 -> AA.
std::string letters(std::uint64_t n) {
  std::string s;
  ++n;
  while (n > 0) {
    --n;
    s.insert(s.begin(), static_cast<char>('A' + n % 26));
    n /= 26;
  }
  return s;
}

std::string hex64(SplitMix64& rng) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (int block = 0; block < 4; ++block) {
    std::uint64_t v = rng.next();
    for (int i = 0; i < 16; ++i) s.push_back(digits[(v >> (60 - 4 * i)) & 0xf]);
  }
  return s;
}

// Floyd's algorithm: m distinct values from [0, n), ascending.
std::vector<std::uint32_t> sample_without_replacement(SplitMix64& rng, std::uint32_t n, std::uint32_t m) {
  std::set<std::uint32_t> chosen;
  for (std::uint32_t j = n - m; j < n; ++j) {
    auto r = static_cast<std::uint32_t>(rng.below(std::uint64_t{j} + 1));
    if (!chosen.insert(r).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

template <typename Action>
struct Pending {
  Action action;
  std::uint64_t seq;
};

template <typename Action>
class Emitter {
 public:
  void add(Action a) { items_.push_back(Pending<Action>{std::move(a), items_.size()}); }
  std::size_t size() const { return items_.size(); }

  void write(const std::filesystem::path& path, SplitMix64 txids) {
    std::stable_sort(items_.begin(), items_.end(), [](const Pending<Action>& x, const Pending<Action>& y) {
      return x.action.block_time < y.action.block_time;
    });
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (auto& p : items_) {
      p.action.txid = hex64(txids);
      out << to_jsonl(p.action) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
  }

 private:
  std::vector<Pending<Action>> items_;
};

Quantity amount(Mantissa m, const std::string& symbol) { return Quantity(m, kPrecision, symbol); }

std::string random_memo(SplitMix64& rng) {
  constexpr std::size_t n_words = sizeof(kMemoWords) / sizeof(kMemoWords[0]);
  std::string memo;
  auto words = rng.between(1, 3);
  for (std::int64_t i = 0; i < words; ++i) {
    if (!memo.empty()) memo += ' ';
    memo += kMemoWords[rng.below(n_words)];
  }
  return memo;
}

}  // namespace

GroundTruth generate(const ScenarioSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::filesystem::create_directories(out_dir);

  GroundTruth truth;
  Emitter<AccountCreation> accounts;
  Emitter<CreateAction> creates;
  Emitter<IssueAction> issues;
  Emitter<TransferAction> transfers;

  const Timestamp t0 = spec.start_time;
  const Timestamp create_time = t0 + kHourMs;
  const Timestamp issue_time = t0 + 2 * kHourMs;
  const Timestamp trade_start = t0 + 3 * kHourMs;
  const Timestamp trade_end = t0 + spec.time_span_ms;

  Timestamp account_clock = t0;
  auto create_account = [&](const std::string& creator, const std::string& name) {
    accounts.add(AccountCreation{{}, account_clock++, creator, name});
    truth.parent_of[name] = creator;
  };
  auto create_token = [&](const TokenId& id, const std::string& creator, std::size_t ordinal) {
    creates.add(CreateAction{{}, create_time + static_cast<Timestamp>(ordinal) * 1000, id, creator,
                             amount(Mantissa{1000000000} * 100000000, id.symbol)});
    ++truth.tokens_per_creator[creator];
  };

  // Organic tokens: up to three per contract account.
  std::vector<TokenId> organic;
  for (std::uint32_t i = 0; i < spec.n_organic_tokens; ++i) {
    std::string contract = "orgtoken" + padded(i / 3 + 1, 2);
    if (i % 3 == 0) create_account(kSystemAccount, contract);
    organic.push_back(TokenId{contract, "ORG" + letters(i)});
    truth.labels[organic.back()] = TokenLabel::organic;
  }

  std::vector<std::string> wallets;
  for (std::uint32_t w = 0; w < spec.n_wallets; ++w) {
    wallets.push_back("wallet" + padded(w + 1, 2));
    truth.wallet_accounts.insert(wallets.back());
    create_account(kSystemAccount, wallets.back());
  }
  auto wallet_child = [](std::uint32_t w, std::uint32_t c) { return "w" + padded(w + 1, 2) + "u" + padded(c + 1, 5); };
  for (std::uint32_t w = 0; w < spec.n_wallets; ++w) {
    for (std::uint32_t c = 0; c < spec.wallet_children; ++c) create_account(wallets[w], wallet_child(w, c));
  }

  std::vector<std::string> users;
  for (std::uint32_t u = 0; u < spec.organic_users; ++u) {
    users.push_back("user" + padded(u + 1, 6));
    create_account(kSystemAccount, users.back());
  }

  for (std::size_t i = 0; i < organic.size(); ++i) create_token(organic[i], organic[i].contract, i);

  // -------------------------------------------------------------------------
  // Organic participation plan.

  struct Participant {
    std::string account;
    std::uint32_t sends;
    SplitMix64 rng;
  };
  std::vector<std::vector<Participant>> plan(organic.size());

  for (std::uint32_t u = 0; u < spec.organic_users && !organic.empty(); ++u) {
    SplitMix64 rng = SplitMix64::substream(spec.seed, 1, u);
    const auto n = static_cast<std::uint32_t>(organic.size());
    std::uint32_t k = n < 3 ? n : static_cast<std::uint32_t>(std::min<std::int64_t>(rng.between(3, 6), n));
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
    for (std::uint32_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
    std::vector<std::uint32_t> sends(k, 0);
    for (std::uint32_t a = 0; a < spec.organic_actions_per_user; ++a) ++sends[a % k];
    for (std::uint32_t i = 0; i < k; ++i) {
      plan[order[i]].push_back(Participant{users[u], sends[i],
                                           SplitMix64::substream(spec.seed, 6, (std::uint64_t{u} << 20) | order[i])});
    }
  }

  const auto per_wallet =
      static_cast<std::uint32_t>(std::llround(spec.wallet_participation_rate * spec.wallet_children));
  for (std::uint32_t t = 0; t < organic.size(); ++t) {
    for (std::uint32_t w = 0; w < spec.n_wallets; ++w) {
      SplitMix64 rng = SplitMix64::substream(spec.seed, 2, (std::uint64_t{t} << 16) | w);
      for (std::uint32_t c : sample_without_replacement(rng, spec.wallet_children, per_wallet)) {
        std::string child = wallet_child(w, c);
        if (spec.wallet_actions_per_child > 0) truth.wallet_children.insert(child);
        plan[t].push_back(Participant{child, spec.wallet_actions_per_child,
                                      SplitMix64::substream(spec.seed, 5, (std::uint64_t{t} << 32) | (w << 20) | c)});
      }
    }
  }

  for (std::size_t t = 0; t < organic.size(); ++t) {
    const TokenId& id = organic[t];
    auto& members = plan[t];
    for (std::size_t p = 0; p < members.size(); ++p) {
      Mantissa stake = kMaxOrganicAmount * std::max<std::uint32_t>(members[p].sends, 1);
      issues.add(IssueAction{{}, issue_time + static_cast<Timestamp>(p), id, id.contract, members[p].account,
                             amount(stake, id.symbol), "issue"});
    }
    for (std::size_t p = 0; p < members.size(); ++p) {
      SplitMix64& rng = members[p].rng;
      for (std::uint32_t s = 0; s < members[p].sends; ++s) {
        std::string to = id.contract;
        if (members.size() > 1) {
          std::size_t q = rng.below(members.size() - 1);
          to = members[q >= p ? q + 1 : q].account;
        }
        Timestamp time = trade_start + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(trade_end - trade_start)));
        Mantissa m = rng.between(1, static_cast<std::int64_t>(kMaxOrganicAmount));
        transfers.add(TransferAction{{}, time, id, members[p].account, to, amount(m, id.symbol), random_memo(rng)});
      }
    }
  }

  // -------------------------------------------------------------------------
  // Manipulated tokens.

  for (std::uint32_t m = 0; m < spec.n_manipulated_tokens; ++m) {
    SplitMix64 rng = SplitMix64::substream(spec.seed, 3, m);
    const std::string manipulator = "manip" + padded(m + 1, 3);
    const std::string contract = "fakecoin" + padded(m + 1, 3);
    const TokenId id{contract, "FAKE" + letters(m)};
    truth.labels[id] = TokenLabel::manipulated;
    create_account(kSystemAccount, manipulator);
    create_account(kSystemAccount, contract);

    std::vector<std::string> bots;
    for (std::uint32_t b = 0; b < spec.manipulator_children; ++b) {
      bots.push_back("bnr" + padded(m + 1, 3) + padded(b + 1, 5));
      truth.bot_accounts.insert(bots.back());
      create_account(manipulator, bots.back());
    }
    create_token(id, manipulator, organic.size() + m);

    const Timestamp burst_start =
        trade_start + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(trade_end - trade_start - spec.burst_span_ms)));
    auto burst_amount = [&] {
      return spec.fixed_burst_quantity ? *spec.fixed_burst_quantity
                                       : static_cast<Mantissa>(rng.between(1, static_cast<std::int64_t>(kMaxOrganicAmount)));
    };
    const Mantissa stake_unit = spec.fixed_burst_quantity ? *spec.fixed_burst_quantity : kMaxOrganicAmount;

    for (std::size_t b = 0; b < bots.size(); ++b) {
      issues.add(IssueAction{{}, issue_time + static_cast<Timestamp>(b), id, manipulator, bots[b],
                             amount(stake_unit * std::max<std::uint32_t>(spec.burst_actions_per_bot, 1), id.symbol),
                             "issue"});
    }
    for (std::size_t b = 0; b + 1 < bots.size(); b += 2) truth.bot_pairs.emplace_back(bots[b], bots[b + 1]);
    for (std::size_t b = 0; b < bots.size() && bots.size() > 1; ++b) {
      std::size_t partner = b % 2 == 0 ? b + 1 : b - 1;
      if (partner >= bots.size()) partner = 0;
      for (std::uint32_t s = 0; s < spec.burst_actions_per_bot; ++s) {
        Timestamp time = burst_start + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(spec.burst_span_ms)));
        transfers.add(TransferAction{{}, time, id, bots[b], bots[partner], amount(burst_amount(), id.symbol),
                                     spec.manipulator_memo});
        ++truth.memo_injected;
      }
    }
  }

  truth.expected_counts = ExpectedCounts{creates.size(), issues.size(), transfers.size(), accounts.size()};

  accounts.write(out_dir / kAccountsFile, SplitMix64::substream(spec.seed, 4, 0));
  creates.write(out_dir / kCreatesFile, SplitMix64::substream(spec.seed, 4, 1));
  issues.write(out_dir / kIssuesFile, SplitMix64::substream(spec.seed, 4, 2));
  transfers.write(out_dir / kTransfersFile, SplitMix64::substream(spec.seed, 4, 3));

  std::ofstream labels(out_dir / kLabelsFile, std::ios::trunc);
  if (!labels) throw std::runtime_error("cannot write labels.json");
  labels << to_json(truth).dump(2) << '\n';
  return truth;
}

json to_json(const GroundTruth& truth) {
  json labels = json::object();
  for (const auto& [id, label] : truth.labels) {
    labels[id.to_string()] = label == TokenLabel::manipulated ? "manipulated" : "organic";
  }
  json pairs = json::array();
  for (const auto& [a, b] : truth.bot_pairs) pairs.push_back(json::array({a, b}));
  return json{{"labels", labels},
              {"bot_accounts", truth.bot_accounts},
              {"wallet_accounts", truth.wallet_accounts},
              {"wallet_children", truth.wallet_children},
              {"parent_of", truth.parent_of},
              {"tokens_per_creator", truth.tokens_per_creator},
              {"bot_pairs", pairs},
              {"memo_injected", truth.memo_injected},
              {"expected_counts", json{{"creates", truth.expected_counts.creates},
                                       {"issues", truth.expected_counts.issues},
                                       {"transfers", truth.expected_counts.transfers},
                                       {"account_creations", truth.expected_counts.account_creations}}}};
}

GroundTruth ground_truth_from_json(const json& j) {
  GroundTruth t;
  for (const auto& [key, value] : j.at("labels").items()) {
    t.labels[parse_token_id(key)] = value.get<std::string>() == "manipulated" ? TokenLabel::manipulated : TokenLabel::organic;
  }
  t.bot_accounts = j.at("bot_accounts").get<std::set<std::string>>();
  t.wallet_accounts = j.at("wallet_accounts").get<std::set<std::string>>();
  t.wallet_children = j.at("wallet_children").get<std::set<std::string>>();
  t.parent_of = j.at("parent_of").get<std::map<std::string, std::string>>();
  t.tokens_per_creator = j.at("tokens_per_creator").get<std::map<std::string, std::uint64_t>>();
  for (const auto& p : j.at("bot_pairs")) t.bot_pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  t.memo_injected = j.at("memo_injected").get<std::uint64_t>();
  const auto& c = j.at("expected_counts");
  t.expected_counts = ExpectedCounts{c.at("creates").get<std::uint64_t>(), c.at("issues").get<std::uint64_t>(),
                                     c.at("transfers").get<std::uint64_t>(),
                                     c.at("account_creations").get<std::uint64_t>()};
  return t;
}

}  // namespace eoscope
