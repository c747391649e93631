#include <algorithm>

#include "doctest.h"
#include "eoscope/detect.hpp"
#include "eoscope/graph.hpp"
#include "eoscope/synth.hpp"
#include "support.hpp"

using namespace eoscope;
using namespace eoscope::testing;
namespace fs = std::filesystem;

namespace {

struct Loaded {
  Dataset ds;
  IngestReport report;
};

Loaded load(const fs::path& dir) {
  Loaded l;
  auto step = [&](const char* file, ActionKind kind) {
    std::vector<fs::path> paths{dir / file};
    IngestReport r = ingest_files(l.ds, paths, kind);
    l.report.files.insert(l.report.files.end(), r.files.begin(), r.files.end());
  };
  step(kAccountsFile, ActionKind::account_creation);
  step(kCreatesFile, ActionKind::create);
  step(kIssuesFile, ActionKind::issue);
  step(kTransfersFile, ActionKind::transfer);
  l.ds.freeze();
  return l;
}

World world_of(const Dataset& ds) {
  World w;
  for (const auto& r : ds.account_creations()) w.creations.emplace_back(ds.accounts().name(r.creator), ds.accounts().name(r.name));
  for (const auto& t : ds.tokens()) {
    if (t.issue_total > 0) w.issued[t.id.to_string()] = static_cast<std::int64_t>(t.issue_total);
  }
  for (const auto& r : ds.transfers()) {
    w.transfers.push_back({ds.tokens()[r.token].id.to_string(), ds.accounts().name(r.from), ds.accounts().name(r.to),
                           static_cast<std::int64_t>(r.amount), r.time});
  }
  return w;
}

ScenarioSpec small_spec() {
  ScenarioSpec s;
  s.n_organic_tokens = 6;
  s.n_manipulated_tokens = 2;
  s.manipulator_children = 40;
  s.burst_actions_per_bot = 6;
  s.wallet_children = 300;
  s.wallet_participation_rate = 0.02;
  s.organic_users = 60;
  s.organic_actions_per_user = 8;
  return s;
}

}  // namespace

TEST_CASE("SplitMix64 matches the published reference sequence") {
  // Reference outputs for seed 1234567.
  SplitMix64 rng(1234567);
  CHECK(rng.next() == 6457827717110365317ULL);
  CHECK(rng.next() == 3203168211198807973ULL);
  CHECK(rng.next() == 9817491932198370423ULL);
}

TEST_CASE("bounded draws stay in range") {
  SplitMix64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    CHECK(rng.below(7) < 7);
    auto v = rng.between(-3, 3);
    CHECK((v >= -3 && v <= 3));
  }
  SplitMix64 a = SplitMix64::substream(42, 1, 5), b = SplitMix64::substream(42, 1, 6);
  CHECK(a.next() != b.next());
}

TEST_CASE("scenario validation") {
  ScenarioSpec s;
  CHECK_NOTHROW(s.validate());
  s.wallet_participation_rate = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = ScenarioSpec{};
  s.time_span_ms = 1000;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("no manipulated tokens means every label is organic") {
  TempDir dir("synth");
  ScenarioSpec s = small_spec();
  s.n_manipulated_tokens = 0;
  GroundTruth truth = generate(s, dir.path());
  CHECK(truth.labels.size() == 6);
  for (const auto& [_, label] : truth.labels) CHECK(label == TokenLabel::organic);
  CHECK(truth.bot_accounts.empty());
}

TEST_CASE("same seed gives byte-identical files, another seed does not") {
  TempDir a("synth"), b("synth"), c("synth");
  ScenarioSpec s = small_spec();
  generate(s, a.path());
  generate(s, b.path());
  for (const char* f : {kTransfersFile, kIssuesFile, kCreatesFile, kAccountsFile, kLabelsFile}) {
    CHECK(read_file(a / f) == read_file(b / f));
  }
  s.seed = 43;
  generate(s, c.path());
  CHECK(read_file(a / kTransfersFile) != read_file(c / kTransfersFile));
}

TEST_CASE("adding tokens leaves existing manipulated tokens untouched") {
  TempDir a("synth"), b("synth");
  ScenarioSpec s = small_spec();
  s.n_organic_tokens = 0;
  generate(s, a.path());
  s.n_manipulated_tokens = 3;
  generate(s, b.path());
  Loaded la = load(a.path()), lb = load(b.path());
  std::set<TokenId> first{parse_token_id("fakecoin001@FAKEA")};
  CHECK(build_ttg(la.ds, &first).named_edges() == build_ttg(lb.ds, &first).named_edges());
}

TEST_CASE("emitted files ingest cleanly and match the ledger") {
  TempDir dir("synth");
  GroundTruth truth = generate(small_spec(), dir.path());
  Loaded l = load(dir.path());
  CHECK(l.report.skipped() == 0);
  for (const auto& f : l.report.files) CHECK(f.beyond_reorder_buffer == 0);

  DatasetStats s = dataset_stats(l.ds);
  CHECK(s.n_transfers == truth.expected_counts.transfers);
  CHECK(s.n_issues == truth.expected_counts.issues);
  CHECK(s.n_creates == truth.expected_counts.creates);
  CHECK(s.n_account_creations == truth.expected_counts.account_creations);
  CHECK(s.n_tokens == truth.labels.size());
  CHECK(l.ds.orphan_tokens().empty());

  CHECK(ground_truth_from_json(nlohmann::json::parse(read_file(dir / kLabelsFile))).parent_of == truth.parent_of);
}

TEST_CASE("graphs built from the scenario match the ledger") {
  TempDir dir("synth");
  GroundTruth truth = generate(small_spec(), dir.path());
  Loaded l = load(dir.path());

  BipartiteCreationGraph tcg = build_tcg(l.ds);
  std::map<std::string, std::uint64_t> outdegree;
  for (const auto& e : tcg.edges) ++outdegree[e.left];
  CHECK(outdegree == truth.tokens_per_creator);

  AccountCreationForest acg = build_acg(l.ds);
  CHECK(acg.link_count() == truth.parent_of.size());
  for (const auto& [child, parent] : truth.parent_of) CHECK(acg.parent(child)->creator == parent);

  CHECK(build_ttg(l.ds).total_weight() == truth.expected_counts.transfers);

  HoldingGraph thg = build_thg(l.ds);
  for (const auto& [token, ledger] : thg.ledgers) {
    CHECK(ledger.negative_events == 0);
    CHECK(ledger.in_graph);
  }
  std::map<TokenId, Rational> share_sum;
  for (const auto& e : thg.edges) share_sum[e.token] += e.exact_share();
  for (const auto& [_, sum] : share_sum) CHECK(sum <= 1);
}

TEST_CASE("bot pairs show up as mutual pairs and dense pairs") {
  TempDir dir("synth");
  ScenarioSpec spec = small_spec();
  GroundTruth truth = generate(spec, dir.path());
  Loaded l = load(dir.path());
  TransferGraph g = build_ttg(l.ds);
  std::set<std::pair<std::string, std::string>> found;
  for (const auto& p : mutual_pairs(g, spec.burst_actions_per_bot / 2)) found.emplace(p.a, p.b);
  for (const auto& pair : truth.bot_pairs) {
    CHECK(found.count(pair) == 1);
    CHECK(subgraph_density(g, {pair.first, pair.second}).density == 1.0);
  }
}

TEST_CASE("the manipulator memo ranks first with the injected count") {
  TempDir dir("synth");
  GroundTruth truth = generate(small_spec(), dir.path());
  Loaded l = load(dir.path());
  auto top = memo_word_frequencies(l.ds, 3);
  REQUIRE_FALSE(top.empty());
  CHECK(top[0].first == "mine");
  CHECK(top[0].second == truth.memo_injected);
}

TEST_CASE("each wallet contributes exactly round(rate * children) senders per organic token") {
  TempDir dir("synth");
  ScenarioSpec spec = small_spec();
  GroundTruth truth = generate(spec, dir.path());
  Loaded l = load(dir.path());
  const auto expected = static_cast<std::size_t>(std::llround(spec.wallet_participation_rate * spec.wallet_children));
  std::map<std::pair<TokenId, std::string>, std::set<std::string>> per_token_wallet;
  for (const auto& r : l.ds.transfers()) {
    const std::string& from = l.ds.accounts().name(r.from);
    auto parent = truth.parent_of.find(from);
    if (parent != truth.parent_of.end() && truth.wallet_accounts.count(parent->second)) {
      per_token_wallet[{l.ds.tokens()[r.token].id, parent->second}].insert(from);
    }
  }
  CHECK(per_token_wallet.size() == spec.n_organic_tokens * spec.n_wallets);
  for (const auto& [_, senders] : per_token_wallet) CHECK(senders.size() == expected);
}

TEST_CASE("organic users spread activity, bots do not") {
  TempDir dir("synth");
  ScenarioSpec spec = small_spec();
  GroundTruth truth = generate(spec, dir.path());
  Loaded l = load(dir.path());
  auto index = std::make_shared<const DetectionIndex>(build_detection_index(l.ds));
  for (const auto& [id, label] : truth.labels) {
    DetectionContext ctx = make_context(l.ds, index, *l.ds.find_token(id));
    ActionRange all{0, ctx.actions.size()};
    std::set<AccountIndex> senders;
    for (const auto& a : ctx.actions) senders.insert(a.sender);
    for (AccountIndex s : senders) {
      const std::string& name = l.ds.accounts().name(s);
      if (name.starts_with("user")) CHECK(compute_anf(ctx, s, all) < Rational(1, 2));
      if (truth.bot_accounts.count(name)) CHECK(compute_anf(ctx, s, all) == 1);
    }
  }
}

TEST_CASE("manipulated tokens separate from organic ones on whole-history factors") {
  TempDir dir("synth");
  ScenarioSpec spec;  // defaults
  GroundTruth truth = generate(spec, dir.path());
  Loaded l = load(dir.path());
  auto index = std::make_shared<const DetectionIndex>(build_detection_index(l.ds));
  World world = world_of(l.ds);

  Rational min_manipulated = -1, max_organic = 0;
  for (const auto& [id, label] : truth.labels) {
    DetectionContext ctx = make_context(l.ds, index, *l.ds.find_token(id));
    ActionRange all{0, ctx.actions.size()};
    Rational attnf = compute_attnf(ctx, all);
    if (label == TokenLabel::organic) {
      max_organic = std::max(max_organic, attnf);
      continue;
    }
    if (min_manipulated < 0 || attnf < min_manipulated) min_manipulated = attnf;

    // The burst group's TTQF, checked against the direct formulas.
    std::vector<AccountIndex> bots;
    std::set<std::string> bot_names;
    for (const auto& a : ctx.actions) {
      if (truth.bot_accounts.count(l.ds.accounts().name(a.sender))) {
        bots.push_back(a.sender);
        bot_names.insert(l.ds.accounts().name(a.sender));
      }
    }
    std::sort(bots.begin(), bots.end());
    bots.erase(std::unique(bots.begin(), bots.end()), bots.end());
    Rational ttqf = compute_ttqf(ctx, bots, all);
    FactorOracle oracle(world, id.to_string());
    CHECK(ttqf == oracle.ttqf(bot_names, 0, oracle.size()));
    CHECK(ttqf * 10 >= Rational(9 * spec.manipulator_children));
  }
  CHECK(min_manipulated > max_organic);
}
