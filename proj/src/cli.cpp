#include "eoscope/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "eoscope/detect.hpp"
#include "eoscope/graph.hpp"
#include "eoscope/ingest.hpp"
#include "eoscope/synth.hpp"

namespace eoscope::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Everything a run can be configured with; one instance per invocation.
struct RunConfig {
  std::vector<fs::path> transfers, issues, creates, accounts;
  fs::path data_dir;
  fs::path out_dir;
  std::string format = "json";
  unsigned threads = 0;
  std::size_t reorder_buffer = 10000;
  bool drop_text = false;

  std::string kind = "ttg";
  std::string side = "out";
  bool weighted = false;
  std::vector<std::string> token_filter;
  fs::path hist;

  std::uint64_t below = 100;
  double top_fraction = 0.01;

  std::size_t k = 14;
  std::size_t top_n = 50;
  std::uint64_t min_weight = 10;
  std::vector<std::string> density_nodes;

  double damping = 0.85;
  double tol = 1e-10;
  std::size_t max_iter = 200;

  std::size_t window = 100000;
  std::size_t pieces = 10;
  std::string attnf_threshold = "50";
  std::string mttqf_threshold = "10000";
  bool whole_history = false;
  bool window_local = false;

  ScenarioSpec scenario;
  double burst_quantity = 20.0;
  bool irregular_burst = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Accepts "50", "10000", "12.5" or "3/4".
Rational parse_rational(const std::string& text) {
  try {
    if (auto dot = text.find('.'); dot != std::string::npos) {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      mpz_class scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, text.size() - dot - 1);
      Rational r(mpz_class(digits), scale);
      r.canonicalize();
      return r;
    }
    Rational r(text);
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    throw UsageError("not a number: " + text);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <typename Writer>
void write_stream(const fs::path& path, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  write_text(path, ss.str());
}

class Runner {
 public:
  Runner(RunConfig cfg, std::ostream& out, std::ostream& err) : cfg_(std::move(cfg)), out_(out), err_(err) {}

  void resolve_inputs() {
    if (!cfg_.data_dir.empty()) {
      auto add_if_present = [&](std::vector<fs::path>& list, const char* name) {
        fs::path p = cfg_.data_dir / name;
        if (fs::exists(p)) list.push_back(p);
      };
      if (!fs::is_directory(cfg_.data_dir)) throw DataError("data directory not found: " + cfg_.data_dir.string());
      add_if_present(cfg_.transfers, kTransfersFile);
      add_if_present(cfg_.issues, kIssuesFile);
      add_if_present(cfg_.creates, kCreatesFile);
      add_if_present(cfg_.accounts, kAccountsFile);
    }
    for (const auto* list : {&cfg_.transfers, &cfg_.issues, &cfg_.creates, &cfg_.accounts}) {
      for (const auto& p : *list) {
        if (!fs::is_regular_file(p)) throw DataError("input not readable: " + p.string());
      }
    }
    if (cfg_.out_dir.empty()) {
      const char* env = std::getenv(kOutputDirEnv);
      cfg_.out_dir = env && *env ? fs::path(env) : fs::path(".");
    }
    fs::create_directories(cfg_.out_dir);
  }

  Dataset& load() {
    IngestOptions options;
    options.reorder_buffer = cfg_.reorder_buffer;
    auto step = [&](const std::vector<fs::path>& paths, ActionKind kind) {
      IngestReport r = ingest_files(dataset_, paths, kind, options);
      report_.files.insert(report_.files.end(), r.files.begin(), r.files.end());
    };
    // Account creations first so duplicate-name checks see the full history.
    step(cfg_.accounts, ActionKind::account_creation);
    step(cfg_.creates, ActionKind::create);
    step(cfg_.issues, ActionKind::issue);
    step(cfg_.transfers, ActionKind::transfer);
    dataset_.freeze();
    if (auto skipped = report_.skipped(); skipped > 0) {
      err_ << "warning: skipped " << skipped << " input lines (see ingest report)\n";
    }
    return dataset_;
  }

  fs::path out(const std::string& name) const { return cfg_.out_dir / name; }

  void stats() {
    load();
    DatasetStats s = dataset_stats(dataset_);
    auto tokens = token_stats(dataset_);
    json doc{{"stats", to_json(s)}, {"ingest", to_json(report_)}};
    json orphans = json::array();
    for (TokenIndex t : dataset_.orphan_tokens()) orphans.push_back(dataset_.tokens()[t].id.to_string());
    doc["orphan_tokens"] = orphans;
    if (!tokens.empty()) {
      ConcentrationStats c = concentration_stats(tokens, cfg_.below, cfg_.top_fraction);
      doc["concentration"] = json{{"below", cfg_.below},
                                  {"top_fraction", cfg_.top_fraction},
                                  {"pct_never_transferred", c.pct_never_transferred},
                                  {"pct_below", c.pct_below},
                                  {"top_share", c.top_share}};
      std::map<double, double> activeness;
      for (const auto& t : tokens) activeness[static_cast<double>(t.activeness)] += 1;
      try {
        PowerLawFit fit = fit_power_law(activeness);
        doc["activeness_fit"] = json{{"beta", fit.beta}, {"r_squared", fit.r_squared}, {"n_points", fit.n_points}};
      } catch (const FitError&) {
        doc["activeness_fit"] = nullptr;
      }
    }
    write_json(out("stats.json"), doc);
    write_stream(out("tokens.csv"), [&](std::ostream& os) {
      os << "token,activeness,n_holders,issue_total\n";
      for (const auto& t : tokens) {
        os << t.token.to_string() << ',' << t.activeness << ',' << t.n_holders << ',' << t.issue_total.to_string() << '\n';
      }
    });
    out_ << "stats: " << s.n_transfers << " transfers, " << s.n_issues << " issues, " << s.n_creates << " creates, "
         << s.n_account_creations << " account creations, " << s.n_tokens << " tokens, " << s.n_holders
         << " holders -> " << out("stats.json").string() << '\n';
  }

  TransferGraph ttg() {
    std::set<TokenId> filter;
    for (const auto& t : cfg_.token_filter) filter.insert(parse_token_id(t));
    return build_ttg(dataset_, filter.empty() ? nullptr : &filter);
  }

  void graph() {
    load();
    const std::string& kind = cfg_.kind;
    json summary;
    std::ostringstream edges;
    Warnings warnings;
    if (kind == "tcg" || kind == "tccg") {
      auto g = kind == "tcg" ? build_tcg(dataset_) : build_tccg(dataset_);
      write_edge_csv(edges, g);
      summary = summary_json(g);
    } else if (kind == "thg") {
      auto g = build_thg(dataset_);
      write_edge_csv(edges, g);
      summary = summary_json(g);
    } else if (kind == "ttg") {
      auto g = ttg();
      write_edge_csv(edges, g);
      summary = summary_json(g);
    } else {
      auto g = build_acg(dataset_, &warnings);
      write_edge_csv(edges, g);
      summary = summary_json(g);
      summary["warnings"] = warnings;
    }
    write_text(out(kind + "_edges.csv"), edges.str());
    write_json(out(kind + "_summary.json"), summary);
    out_ << "graph " << kind << " -> " << out(kind + "_edges.csv").string() << '\n';
  }

  DegreeHistogram histogram() {
    const std::string& kind = cfg_.kind;
    const std::string& side = cfg_.side;
    auto direction = [&] {
      if (side == "in") return Direction::in;
      if (side == "out") return Direction::out;
      if (side == "total") return Direction::total;
      throw UsageError("--side must be in, out or total for " + kind);
    };
    auto bipartite_side = [&] {
      if (side == "left") return Side::left;
      if (side == "right") return Side::right;
      throw UsageError("--side must be left or right for " + kind);
    };
    if (kind == "tcg") return degree_distribution(build_tcg(dataset_), bipartite_side());
    if (kind == "tccg") return degree_distribution(build_tccg(dataset_), bipartite_side());
    if (kind == "thg") return degree_distribution(build_thg(dataset_), bipartite_side());
    if (kind == "ttg") return degree_distribution(ttg(), direction(), cfg_.weighted);
    return degree_distribution(build_acg(dataset_), direction());
  }

  void degrees() {
    load();
    DegreeHistogram hist = histogram();
    std::string name = "degrees_" + cfg_.kind + "_" + cfg_.side;
    if (cfg_.format == "csv") {
      write_stream(out(name + ".csv"), [&](std::ostream& os) { write_distribution_csv(os, hist); });
      name += ".csv";
    } else {
      write_json(out(name + ".json"), to_json(hist));
      name += ".json";
    }
    out_ << "degrees " << cfg_.kind << "/" << cfg_.side << ": " << hist.size() << " distinct degrees -> "
         << out(name).string() << '\n';
  }

  void fit() {
    std::map<double, double> points;
    std::string source;
    if (!cfg_.hist.empty()) {
      std::ifstream in(cfg_.hist);
      if (!in) throw DataError("cannot read " + cfg_.hist.string());
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError("malformed histogram line: " + line);
        try {
          points[std::stod(line.substr(0, comma))] = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
          throw DataError("malformed histogram line: " + line);
        }
      }
      source = cfg_.hist.string();
    } else {
      load();
      for (const auto& [x, y] : histogram()) points[static_cast<double>(x)] = static_cast<double>(y);
      source = cfg_.kind + "/" + cfg_.side;
    }
    PowerLawFit f = fit_power_law(points);
    write_json(out("fit.json"),
               json{{"source", source}, {"beta", f.beta}, {"r_squared", f.r_squared}, {"n_points", f.n_points}});
    out_ << "fit " << source << ": beta=" << f.beta << " r2=" << f.r_squared << " points=" << f.n_points << '\n';
  }

  void pagerank_cmd() {
    load();
    TransferGraph g = ttg();
    if (g.node_count() == 0) throw DataError("no transfers to rank");
    PageRankResult pr = pagerank(g, cfg_.damping, cfg_.tol, cfg_.max_iter);
    if (!pr.converged) err_ << "warning: pagerank did not converge in " << cfg_.max_iter << " iterations\n";
    std::vector<TransferGraph::NodeId> order(g.node_count());
    for (TransferGraph::NodeId i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      if (pr.scores[a] != pr.scores[b]) return pr.scores[a] > pr.scores[b];
      return g.name(a) < g.name(b);
    });
    if (cfg_.format == "csv") {
      write_stream(out("pagerank.csv"), [&](std::ostream& os) {
        os << "node,score\n";
        char buf[32];
        for (auto n : order) {
          std::snprintf(buf, sizeof buf, "%.17g", pr.scores[n]);
          os << g.name(n) << ',' << buf << '\n';
        }
      });
    } else {
      json scores = json::array();
      for (auto n : order) scores.push_back(json{{"node", g.name(n)}, {"score", pr.scores[n]}});
      write_json(out("pagerank.json"), json{{"damping", cfg_.damping},
                                            {"iterations", pr.iterations},
                                            {"converged", pr.converged},
                                            {"scores", scores}});
    }
    out_ << "pagerank: " << g.node_count() << " nodes, " << pr.iterations << " iterations, top "
         << g.name(order.front()) << '\n';
  }

  void cttg() {
    load();
    Warnings warnings;
    TransferGraph center = build_cttg(ttg(), cfg_.k, &warnings);
    for (const auto& w : warnings) err_ << "warning: " << w << '\n';
    std::ostringstream edges;
    write_edge_csv(edges, center);
    write_text(out("cttg_edges.csv"), edges.str());
    json members = json::array();
    for (TransferGraph::NodeId n = 0; n < center.node_count(); ++n) members.push_back(center.name(n));
    json summary = summary_json(center);
    summary["members"] = members;
    summary["k"] = cfg_.k;
    write_json(out("cttg_summary.json"), summary);
    out_ << "cttg: " << center.node_count() << " accounts, " << center.edge_count() << " edges -> "
         << out("cttg_edges.csv").string() << '\n';
  }

  void patterns() {
    load();
    TransferGraph g = ttg();
    json pairs = json::array();
    auto mutual = mutual_pairs(g, cfg_.min_weight);
    for (const auto& p : mutual) pairs.push_back(json{{"a", p.a}, {"b", p.b}, {"w_ab", p.w_ab}, {"w_ba", p.w_ba}});

    std::set<std::string> group(cfg_.density_nodes.begin(), cfg_.density_nodes.end());
    std::string group_source = "nodes";
    if (group.empty()) {
      TransferGraph center = build_cttg(g, cfg_.k);
      for (TransferGraph::NodeId n = 0; n < center.node_count(); ++n) group.insert(center.name(n));
      group_source = "cttg";
    }
    json density = nullptr;
    if (group.size() >= 2) {
      DensityReport d = subgraph_density(g, group);
      density = json{{"group", group_source},
                     {"nodes", group},
                     {"edge_count", d.edge_count},
                     {"possible_edges", d.possible_edges},
                     {"density", d.density},
                     {"total_weight", d.total_weight}};
    }
    write_json(out("patterns.json"), json{{"min_weight", cfg_.min_weight}, {"mutual_pairs", pairs}, {"density", density}});
    out_ << "patterns: " << mutual.size() << " mutual pairs at weight >= " << cfg_.min_weight << '\n';
  }

  void memo() {
    if (cfg_.transfers.empty()) throw DataError("memo needs transfer inputs");
    MemoCounter counter;
    IngestOptions options;
    options.reorder_buffer = cfg_.reorder_buffer;
    std::uint64_t memos = 0;
    for (const auto& p : cfg_.transfers) {
      stream_transfers(p, [&](TransferAction&& a) {
        counter.add(a.memo);
        ++memos;
      }, options);
    }
    auto top = counter.top(cfg_.top_n);
    if (cfg_.format == "csv") {
      write_stream(out("memo.csv"), [&](std::ostream& os) {
        os << "word,count\n";
        for (const auto& [w, c] : top) os << w << ',' << c << '\n';
      });
    } else {
      json words = json::array();
      for (const auto& [w, c] : top) words.push_back(json{{"word", w}, {"count", c}});
      write_json(out("memo.json"), json{{"memos", memos}, {"words", words}});
    }
    out_ << "memo: " << memos << " memos, top word " << (top.empty() ? std::string("-") : top.front().first) << '\n';
  }

  void detect() {
    DetectOptions opts;
    opts.window_size = cfg_.window;
    opts.pieces = cfg_.pieces;
    opts.whole_history = cfg_.whole_history;
    opts.factors.denominators = cfg_.window_local ? Denominators::window_local : Denominators::lifetime;
    opts.thresholds = Thresholds{parse_rational(cfg_.attnf_threshold), parse_rational(cfg_.mttqf_threshold)};
    opts.threads = cfg_.threads;
    load();
    auto reports = detect_all(dataset_, opts);
    auto flagged = classify(reports, opts.thresholds);
    rank_reports(reports);
    json doc = to_json(std::span<const FactorReport>(reports));
    write_json(out("detect_report.json"), doc);
    write_stream(out("detect_summary.csv"), [&](std::ostream& os) { write_report_csv(os, reports); });
    out_ << "detect: " << reports.size() << " tokens, " << flagged.size() << " suspicious";
    if (!flagged.empty()) out_ << ", top " << flagged.front().token.to_string();
    out_ << " -> " << out("detect_report.json").string() << '\n';
  }

  void synth() {
    ScenarioSpec spec = cfg_.scenario;
    if (cfg_.irregular_burst) {
      spec.fixed_burst_quantity.reset();
    } else {
      spec.fixed_burst_quantity = static_cast<Mantissa>(std::llround(cfg_.burst_quantity * 10000));
    }
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    GroundTruth truth = generate(spec, cfg_.out_dir);
    std::size_t manipulated = 0;
    for (const auto& [_, label] : truth.labels) manipulated += label == TokenLabel::manipulated;
    out_ << "synth: seed " << spec.seed << ", " << truth.labels.size() << " tokens (" << manipulated
         << " manipulated), " << truth.expected_counts.transfers << " transfers -> " << cfg_.out_dir.string() << '\n';
  }

 private:
  RunConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
  Dataset dataset_;
  IngestReport report_;
};

void add_inputs(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--transfers", cfg.transfers, "Transfer action JSONL files");
  cmd->add_option("--issues", cfg.issues, "Issue action JSONL files");
  cmd->add_option("--creates", cfg.creates, "Create action JSONL files");
  cmd->add_option("--accounts", cfg.accounts, "Account creation JSONL files");
  cmd->add_option("--data-dir", cfg.data_dir, "Directory laid out like synth output");
  cmd->add_option("--reorder-buffer", cfg.reorder_buffer, "Records held back to repair timestamp disorder");
}

void add_graph_selector(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--kind", cfg.kind, "Graph: tcg, tccg, thg, ttg, acg")
      ->check(CLI::IsMember({"tcg", "tccg", "thg", "ttg", "acg"}));
  cmd->add_option("--side", cfg.side, "left/right for bipartite graphs, in/out/total otherwise");
  cmd->add_flag("--weighted", cfg.weighted, "Use edge weights (ttg)");
  cmd->add_option("--token", cfg.token_filter, "Restrict the transfer graph to these contract@symbol tokens");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Token ecosystem analytics for EOSIO-style action logs", args.empty() ? "eoscope" : args[0]};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", cfg.out_dir, std::string("Output directory (default $") + kOutputDirEnv + " or .)");
  app.add_option("--threads", cfg.threads, "Worker threads (default: available cores)");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* stats = app.add_subcommand("stats", "Dataset counts, token activeness and concentration");
  add_inputs(stats, cfg);
  stats->add_option("--below", cfg.below, "Activeness threshold for pct_below");
  stats->add_option("--top-fraction", cfg.top_fraction, "Fraction of tokens for top_share");

  auto* graph = app.add_subcommand("graph", "Export a graph as edge-list CSV plus JSON summary");
  add_inputs(graph, cfg);
  add_graph_selector(graph, cfg);

  auto* degrees = app.add_subcommand("degrees", "Degree distribution of a graph");
  add_inputs(degrees, cfg);
  add_graph_selector(degrees, cfg);

  auto* fit = app.add_subcommand("fit", "Power-law fit of a degree distribution");
  add_inputs(fit, cfg);
  add_graph_selector(fit, cfg);
  fit->add_option("--hist", cfg.hist, "Fit an x,y CSV instead of a graph");

  auto* pr = app.add_subcommand("pagerank", "Weighted PageRank over the transfer graph");
  add_inputs(pr, cfg);
  pr->add_option("--damping", cfg.damping);
  pr->add_option("--tol", cfg.tol);
  pr->add_option("--max-iter", cfg.max_iter);
  pr->add_option("--token", cfg.token_filter);

  auto* cttg = app.add_subcommand("cttg", "Subgraph of the k most active accounts");
  add_inputs(cttg, cfg);
  cttg->add_option("-k", cfg.k, "Accounts to keep")->check(CLI::PositiveNumber);
  cttg->add_option("--token", cfg.token_filter);

  auto* patterns = app.add_subcommand("patterns", "Mutual trading pairs and group density");
  add_inputs(patterns, cfg);
  patterns->add_option("--min-weight", cfg.min_weight, "Minimum weight in both directions");
  patterns->add_option("-k", cfg.k, "Center accounts used as the default density group")->check(CLI::PositiveNumber);
  patterns->add_option("--nodes", cfg.density_nodes, "Explicit density group")->delimiter(',');
  patterns->add_option("--token", cfg.token_filter);

  auto* memo = app.add_subcommand("memo", "Most frequent memo words");
  add_inputs(memo, cfg);
  memo->add_option("--top-n", cfg.top_n);

  auto* detect = app.add_subcommand("detect", "Score tokens for manufactured activity");
  add_inputs(detect, cfg);
  detect->add_option("-W,--window", cfg.window, "Actions per window");
  detect->add_option("-P,--pieces", cfg.pieces, "Pieces per window");
  detect->add_option("--attnf-threshold", cfg.attnf_threshold, "Flag when ATTNF exceeds this (integer, decimal or p/q)");
  detect->add_option("--mttqf-threshold", cfg.mttqf_threshold, "Flag when MTTQF exceeds this");
  detect->add_flag("--whole-history", cfg.whole_history, "Score each token's full history instead of windows");
  detect->add_flag("--window-local", cfg.window_local, "Normalise by activity inside the window's time span");

  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic scenario");
  auto& s = cfg.scenario;
  synth->add_option("--seed", s.seed, "Generator seed");
  synth->add_option("--organic-tokens", s.n_organic_tokens, "Tokens with organic traffic");
  synth->add_option("--manipulated-tokens", s.n_manipulated_tokens, "Tokens driven by bot bursts");
  synth->add_option("--bots", s.manipulator_children, "Bots per manipulator");
  synth->add_option("--burst-actions", s.burst_actions_per_bot, "Transfers per bot");
  synth->add_option("--burst-quantity", cfg.burst_quantity, "Fixed burst amount");
  synth->add_flag("--irregular-burst", cfg.irregular_burst, "Random burst amounts");
  synth->add_option("--memo", s.manipulator_memo, "Memo written by bots");
  synth->add_option("--wallets", s.n_wallets, "Wallet services");
  synth->add_option("--wallet-children", s.wallet_children, "Accounts created per wallet");
  synth->add_option("--wallet-rate", s.wallet_participation_rate, "Fraction of wallet children trading each token");
  synth->add_option("--wallet-actions", s.wallet_actions_per_child, "Transfers per participating wallet child");
  synth->add_option("--users", s.organic_users, "Independent users");
  synth->add_option("--user-actions", s.organic_actions_per_user, "Transfers per user");
  synth->add_option("--days", s.time_span_ms, "Time span in days")
      ->transform([](std::string v) { return std::to_string(std::stoll(v) * 86400000LL); });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (cfg.threads == 0) cfg.threads = std::max(1u, std::thread::hardware_concurrency());

  try {
    if (detect->parsed()) {
      WindowSearchConfig{cfg.window, cfg.pieces, FactorKind::attnf}.validate();
      parse_rational(cfg.attnf_threshold);
      parse_rational(cfg.mttqf_threshold);
    }
    Runner runner(std::move(cfg), out, err);
    if (synth->parsed()) {
      runner.resolve_inputs();
      runner.synth();
      return kExitOk;
    }
    runner.resolve_inputs();
    if (stats->parsed()) runner.stats();
    if (graph->parsed()) runner.graph();
    if (degrees->parsed()) runner.degrees();
    if (fit->parsed()) runner.fit();
    if (pr->parsed()) runner.pagerank_cmd();
    if (cttg->parsed()) runner.cttg();
    if (patterns->parsed()) runner.patterns();
    if (memo->parsed()) runner.memo();
    if (detect->parsed()) runner.detect();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    // Raised while validating flag combinations before any data is read.
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace eoscope::cli
