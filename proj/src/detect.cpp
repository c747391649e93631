#include "eoscope/detect.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cstdio>
#include <thread>

namespace eoscope {

using nlohmann::json;

void DetectionIndex::record(AccountIndex sender, TokenIndex token, Mantissa amount, Timestamp time) {
  SenderProfile& p = senders[sender];
  ++p.total_actions;
  ++p.actions_by_token[token];
  amounts_[sender][token] += amount;
  if (has_events) p.events.push_back(SenderEvent{time, token, amount});
}

void DetectionIndex::finalize() {
  for (auto& [sender, by_token] : amounts_) {
    SenderProfile& p = senders[sender];
    p.quantity_by_token.clear();
    p.total_quantity = 0;
    for (const auto& [token, amount] : by_token) {
      Mantissa issued = token < issue_totals.size() ? issue_totals[token] : 0;
      if (issued <= 0) continue;
      Rational q = to_rational(amount, issued);
      p.total_quantity += q;
      p.quantity_by_token.emplace(token, std::move(q));
    }
    std::stable_sort(p.events.begin(), p.events.end(),
                     [](const SenderEvent& a, const SenderEvent& b) { return a.time < b.time; });
  }
  amounts_.clear();
}

DetectionIndex build_detection_index(const Dataset& ds, bool keep_events) {
  DetectionIndex index;
  index.has_events = keep_events;
  index.issue_totals.reserve(ds.tokens().size());
  for (const auto& t : ds.tokens()) index.issue_totals.push_back(t.issue_total);
  for (const auto& r : ds.account_creations()) ++index.children_count[r.creator];
  for (const auto& r : ds.transfers()) index.record(r.from, r.token, r.amount, r.time);
  index.finalize();
  return index;
}

DetectionContext make_context(const Dataset& ds, std::shared_ptr<const DetectionIndex> index, TokenIndex token) {
  std::unordered_map<AccountIndex, AccountIndex> parent_of;
  for (const auto& r : ds.account_creations()) parent_of.emplace(r.name, r.creator);

  DetectionContext ctx;
  ctx.token = token;
  ctx.token_id = ds.tokens().at(token).id;
  ctx.index = std::move(index);
  for (const auto& r : ds.transfers()) {
    if (r.token != token) continue;
    DetectAction a{r.from, r.amount, std::nullopt, r.time};
    if (auto it = parent_of.find(r.from); it != parent_of.end()) a.parent = it->second;
    ctx.actions.push_back(a);
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// Range summaries

namespace {

// Known parents map to their index; an unknown parent becomes a private
// negative key per sender.
using ParentKey = std::int64_t;

struct SenderTally {
  AccountIndex sender;
  std::uint64_t count;
  Mantissa amount;
  ParentKey parent;
};

struct RangeSummary {
  std::vector<SenderTally> senders;  // sorted by sender
  Timestamp first_time = 0;
  Timestamp last_time = 0;

  const SenderTally* find(AccountIndex s) const {
    auto it = std::lower_bound(senders.begin(), senders.end(), s,
                               [](const SenderTally& t, AccountIndex v) { return t.sender < v; });
    return it != senders.end() && it->sender == s ? &*it : nullptr;
  }
};

ParentKey parent_key(const DetectAction& a) {
  return a.parent ? static_cast<ParentKey>(*a.parent) : -static_cast<ParentKey>(a.sender) - 1;
}

RangeSummary summarize(const DetectionContext& ctx, ActionRange range) {
  if (range.begin >= range.end) throw DetectError("empty action range");
  if (range.end > ctx.actions.size()) throw DetectError("action range past the end of the list");
  if (!ctx.index) throw DetectError("detection context has no index");

  RangeSummary s;
  std::unordered_map<AccountIndex, std::size_t> slot;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    const DetectAction& a = ctx.actions[i];
    auto [it, inserted] = slot.try_emplace(a.sender, s.senders.size());
    if (inserted) s.senders.push_back(SenderTally{a.sender, 0, 0, parent_key(a)});
    SenderTally& t = s.senders[it->second];
    ++t.count;
    t.amount += a.amount;
  }
  std::sort(s.senders.begin(), s.senders.end(),
            [](const SenderTally& a, const SenderTally& b) { return a.sender < b.sender; });
  s.first_time = ctx.actions[range.begin].time;
  s.last_time = ctx.actions[range.end - 1].time;
  return s;
}

const SenderProfile& profile_of(const DetectionContext& ctx, AccountIndex sender) {
  auto it = ctx.index->senders.find(sender);
  if (it == ctx.index->senders.end()) {
    throw DetectError("sender " + std::to_string(sender) + " is missing from the detection index");
  }
  return it->second;
}

// Events of `p` whose time lies in the summary's span.
std::span<const SenderEvent> events_in_span(const DetectionContext& ctx, const SenderProfile& p,
                                            const RangeSummary& s) {
  if (!ctx.index->has_events) throw DetectError("window-local denominators need an index built with events");
  auto lo = std::lower_bound(p.events.begin(), p.events.end(), s.first_time,
                             [](const SenderEvent& e, Timestamp t) { return e.time < t; });
  auto hi = std::upper_bound(lo, p.events.end(), s.last_time,
                             [](Timestamp t, const SenderEvent& e) { return t < e.time; });
  return {lo, hi};
}

std::uint64_t action_denominator(const DetectionContext& ctx, const SenderTally& t, const RangeSummary& s,
                                 const FactorOptions& opts) {
  const SenderProfile& p = profile_of(ctx, t.sender);
  std::uint64_t denom = 0;
  if (opts.denominators == Denominators::lifetime) {
    auto it = p.actions_by_token.find(ctx.token);
    if (it == p.actions_by_token.end() || it->second < t.count) {
      throw DetectError("index has fewer actions for sender " + std::to_string(t.sender) + " than the context");
    }
    denom = p.total_actions;
  } else {
    denom = events_in_span(ctx, p, s).size();
  }
  if (denom < t.count) throw DetectError("action denominator smaller than numerator");
  return denom;
}

Rational quantity_denominator(const DetectionContext& ctx, const SenderTally& t, const RangeSummary& s,
                              const FactorOptions& opts) {
  const SenderProfile& p = profile_of(ctx, t.sender);
  if (opts.denominators == Denominators::lifetime) return p.total_quantity;
  std::map<TokenIndex, Mantissa> moved;
  for (const auto& e : events_in_span(ctx, p, s)) moved[e.token] += e.amount;
  Rational total = 0;
  for (const auto& [token, amount] : moved) {
    Mantissa issued = token < ctx.index->issue_totals.size() ? ctx.index->issue_totals[token] : 0;
    if (issued > 0) total += to_rational(amount, issued);
  }
  return total;
}

Mantissa issued_total(const DetectionContext& ctx) {
  const auto& totals = ctx.index->issue_totals;
  return ctx.token < totals.size() ? totals[ctx.token] : 0;
}

Rational tanf_of(const DetectionContext& ctx, const RangeSummary& s, const FactorOptions& opts) {
  Rational sum = 0;
  for (const auto& t : s.senders) {
    sum += to_rational(t.count, action_denominator(ctx, t, s, opts));
  }
  return sum;
}

Rational acf_of(const RangeSummary& s) {
  std::vector<ParentKey> parents;
  for (const auto& t : s.senders) parents.push_back(t.parent);
  std::sort(parents.begin(), parents.end());
  auto distinct = static_cast<std::uint64_t>(std::unique(parents.begin(), parents.end()) - parents.begin());
  return to_rational(static_cast<std::uint64_t>(s.senders.size()), distinct);
}

Rational parent_mass_of(const DetectionContext& ctx, const RangeSummary& s) {
  std::map<ParentKey, std::uint64_t> in_range;
  for (const auto& t : s.senders) ++in_range[t.parent];
  Rational mass = 0;
  for (const auto& [parent, n] : in_range) {
    if (parent < 0) {
      mass += 1;
      continue;
    }
    auto it = ctx.index->children_count.find(static_cast<AccountIndex>(parent));
    if (it == ctx.index->children_count.end() || it->second < n) {
      throw DetectError("parent " + std::to_string(parent) + " has fewer recorded children than sending children");
    }
    mass += to_rational(it->second, n);
  }
  return mass;
}

Rational attnf_of(const DetectionContext& ctx, const RangeSummary& s, const FactorOptions& opts) {
  return tanf_of(ctx, s, opts) / parent_mass_of(ctx, s);
}

Rational member_quantity_share(const DetectionContext& ctx, const SenderTally& t, const RangeSummary& s,
                               Mantissa issued, const FactorOptions& opts) {
  if (t.amount == 0) return 0;
  Rational denom = quantity_denominator(ctx, t, s, opts);
  if (denom == 0) throw DetectError("sender " + std::to_string(t.sender) + " has no normalised quantity on record");
  Rational share = to_rational(t.amount, issued) / denom;
  if (share > 1) throw DetectError("quantity share above 1 for sender " + std::to_string(t.sender));
  return share;
}

MttqfResult mttqf_of(const DetectionContext& ctx, const RangeSummary& s, const FactorOptions& opts) {
  Mantissa issued = issued_total(ctx);
  if (issued <= 0) return MttqfResult{0, false};
  std::map<ParentKey, Rational> groups;
  for (const auto& t : s.senders) groups[t.parent] += member_quantity_share(ctx, t, s, issued, opts);
  MttqfResult best{0, true};
  bool first = true;
  for (const auto& [_, ttqf] : groups) {
    if (first || ttqf > best.value) best.value = ttqf;
    first = false;
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Factors

Rational compute_acf(const DetectionContext& ctx, ActionRange range) { return acf_of(summarize(ctx, range)); }

Rational compute_anf(const DetectionContext& ctx, AccountIndex sender, ActionRange range, const FactorOptions& opts) {
  RangeSummary s = summarize(ctx, range);
  const SenderTally* t = s.find(sender);
  if (!t) throw DetectError("sender " + std::to_string(sender) + " has no action in range");
  return to_rational(t->count, action_denominator(ctx, *t, s, opts));
}

Rational compute_tanf(const DetectionContext& ctx, ActionRange range, const FactorOptions& opts) {
  return tanf_of(ctx, summarize(ctx, range), opts);
}

Rational compute_attnf(const DetectionContext& ctx, ActionRange range, const FactorOptions& opts) {
  return attnf_of(ctx, summarize(ctx, range), opts);
}

Rational compute_ttqf(const DetectionContext& ctx, std::span<const AccountIndex> group, ActionRange range,
                      const FactorOptions& opts) {
  if (group.empty()) throw DetectError("empty sender group");
  RangeSummary s = summarize(ctx, range);
  Mantissa issued = issued_total(ctx);
  if (issued <= 0) throw DetectError("token " + ctx.token_id.to_string() + " has no issued supply");
  Rational sum = 0;
  for (AccountIndex member : group) {
    const SenderTally* t = s.find(member);
    if (!t) throw DetectError("group member " + std::to_string(member) + " has no action in range");
    sum += member_quantity_share(ctx, *t, s, issued, opts);
  }
  return sum;
}

MttqfResult compute_mttqf(const DetectionContext& ctx, ActionRange range, const FactorOptions& opts) {
  return mttqf_of(ctx, summarize(ctx, range), opts);
}

// ---------------------------------------------------------------------------
// Window search

void WindowSearchConfig::validate() const {
  if (pieces < 1) throw std::invalid_argument("pieces must be at least 1");
  if (window_size < pieces) throw std::invalid_argument("window size must be at least the piece count");
  if (window_size % pieces != 0) throw std::invalid_argument("window size must be divisible by the piece count");
}

WindowResult evaluate_factor(const DetectionContext& ctx, ActionRange range, FactorKind kind,
                             const FactorOptions& opts) {
  RangeSummary s = summarize(ctx, range);
  if (kind == FactorKind::attnf) return WindowResult{attnf_of(ctx, s, opts), range, true};
  MttqfResult m = mttqf_of(ctx, s, opts);
  return WindowResult{m.value, range, m.defined};
}

WindowResult search_max_factor(const DetectionContext& ctx, const WindowSearchConfig& cfg, const FactorOptions& opts) {
  cfg.validate();
  const std::size_t n = ctx.actions.size();
  if (n == 0) throw DetectError("no actions to search");
  if (n < cfg.window_size) return evaluate_factor(ctx, ActionRange{0, n}, cfg.flag, opts);

  const std::size_t piece_size = cfg.window_size / cfg.pieces;
  const std::size_t piece_count = n / piece_size;
  std::vector<Rational> scores;
  scores.reserve(piece_count);
  for (std::size_t i = 0; i < piece_count; ++i) {
    scores.push_back(evaluate_factor(ctx, ActionRange{i * piece_size, (i + 1) * piece_size}, cfg.flag, opts).value);
  }

  Rational best = 0;
  for (std::size_t i = 0; i < cfg.pieces; ++i) best += scores[i];
  Rational running = best;
  std::size_t best_index = 0;
  for (std::size_t i = cfg.pieces; i < scores.size(); ++i) {
    running += scores[i] - scores[i - cfg.pieces];
    if (running > best) {
      best = running;
      best_index = i - cfg.pieces + 1;
    }
  }

  const std::size_t start = best_index * piece_size;
  const std::size_t end = std::min(start + cfg.window_size, n);
  return evaluate_factor(ctx, ActionRange{start, end}, cfg.flag, opts);
}

// ---------------------------------------------------------------------------
// Reports

bool is_suspicious(const FactorReport& r, const Thresholds& t) { return r.attnf > t.attnf || r.mttqf > t.mttqf; }

FactorReport detect_token(const DetectionContext& ctx, const DetectOptions& opts) {
  FactorReport r;
  r.token = ctx.token_id;
  r.n_actions = ctx.actions.size();

  WindowResult attnf, mttqf;
  if (opts.whole_history) {
    ActionRange all{0, ctx.actions.size()};
    attnf = evaluate_factor(ctx, all, FactorKind::attnf, opts.factors);
    mttqf = evaluate_factor(ctx, all, FactorKind::mttqf, opts.factors);
  } else {
    WindowSearchConfig cfg{opts.window_size, opts.pieces, FactorKind::attnf};
    attnf = search_max_factor(ctx, cfg, opts.factors);
    cfg.flag = FactorKind::mttqf;
    mttqf = search_max_factor(ctx, cfg, opts.factors);
  }
  r.attnf = attnf.value;
  r.attnf_window = attnf.window;
  r.mttqf = mttqf.value;
  r.mttqf_window = mttqf.window;
  r.mttqf_defined = mttqf.defined;

  RangeSummary s = summarize(ctx, r.attnf_window);
  r.acf = acf_of(s);
  r.tanf = tanf_of(ctx, s, opts.factors);
  r.rank_score = r.attnf * r.mttqf;
  r.suspicious = is_suspicious(r, opts.thresholds);
  return r;
}

std::vector<FactorReport> detect_all(const Dataset& ds, const DetectOptions& opts) {
  WindowSearchConfig{opts.window_size, opts.pieces, FactorKind::attnf}.validate();
  auto index = std::make_shared<const DetectionIndex>(
      build_detection_index(ds, opts.factors.denominators == Denominators::window_local));

  std::unordered_map<AccountIndex, AccountIndex> parent_of;
  for (const auto& r : ds.account_creations()) parent_of.emplace(r.name, r.creator);

  // Transfer positions per token, in time order.
  std::vector<std::vector<std::uint32_t>> by_token(ds.tokens().size());
  auto transfers = ds.transfers();
  for (std::size_t i = 0; i < transfers.size(); ++i) by_token[transfers[i].token].push_back(static_cast<std::uint32_t>(i));

  std::vector<TokenIndex> work;
  for (TokenIndex t = 0; t < by_token.size(); ++t) {
    if (!by_token[t].empty()) work.push_back(t);
  }
  std::sort(work.begin(), work.end(), [&](TokenIndex a, TokenIndex b) { return ds.tokens()[a].id < ds.tokens()[b].id; });

  std::vector<FactorReport> reports(work.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < work.size();) {
      try {
        DetectionContext ctx;
        ctx.token = work[k];
        ctx.token_id = ds.tokens()[work[k]].id;
        ctx.index = index;
        ctx.actions.reserve(by_token[work[k]].size());
        for (std::uint32_t i : by_token[work[k]]) {
          const TransferRecord& r = transfers[i];
          DetectAction a{r.from, r.amount, std::nullopt, r.time};
          if (auto it = parent_of.find(r.from); it != parent_of.end()) a.parent = it->second;
          ctx.actions.push_back(a);
        }
        reports[k] = detect_token(ctx, opts);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = std::max(1u, opts.threads);
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return reports;
}

void rank_reports(std::vector<FactorReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(), [](const FactorReport& a, const FactorReport& b) {
    if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
    return a.token < b.token;
  });
}

std::vector<FactorReport> classify(std::vector<FactorReport>& reports, const Thresholds& t) {
  std::vector<FactorReport> flagged;
  for (auto& r : reports) {
    r.suspicious = is_suspicious(r, t);
    if (r.suspicious) flagged.push_back(r);
  }
  rank_reports(flagged);
  return flagged;
}

json to_json(const FactorReport& r) {
  auto window = [](const ActionRange& w) { return json::array({w.begin, w.end}); };
  return json{{"token", r.token.to_string()},
              {"n_actions", r.n_actions},
              {"acf", r.acf.get_d()},
              {"tanf", r.tanf.get_d()},
              {"attnf", r.attnf.get_d()},
              {"mttqf", r.mttqf.get_d()},
              {"rank_score", r.rank_score.get_d()},
              {"exact", json{{"acf", rational_to_string(r.acf)},
                             {"tanf", rational_to_string(r.tanf)},
                             {"attnf", rational_to_string(r.attnf)},
                             {"mttqf", rational_to_string(r.mttqf)},
                             {"rank_score", rational_to_string(r.rank_score)}}},
              {"attnf_window", window(r.attnf_window)},
              {"mttqf_window", window(r.mttqf_window)},
              {"mttqf_defined", r.mttqf_defined},
              {"suspicious", r.suspicious}};
}

json to_json(std::span<const FactorReport> reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

void write_report_csv(std::ostream& out, std::span<const FactorReport> reports) {
  out << "token,attnf,mttqf,acf,suspicious,rank_score,window_start,window_end\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%s,%.10g,%zu,%zu", r.attnf.get_d(), r.mttqf.get_d(),
                  r.acf.get_d(), r.suspicious ? "true" : "false", r.rank_score.get_d(), r.attnf_window.begin,
                  r.attnf_window.end);
    out << r.token.to_string() << ',' << buf << '\n';
  }
}

}  // namespace eoscope
