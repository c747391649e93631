#include "eoscope/ingest.hpp"

#include <algorithm>
#include <fstream>

namespace eoscope {

using nlohmann::json;

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::transfer: return "transfer";
    case ActionKind::issue: return "issue";
    case ActionKind::create: return "create";
    case ActionKind::account_creation: return "account_creation";
  }
  return "unknown";
}

std::uint32_t NameTable::intern(std::string_view name) {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> NameTable::find(std::string_view name) const {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dataset

namespace {

void check_name(std::string_view role, std::string_view name) {
  if (check_account_name(name) == NameCheck::invalid) {
    throw ValidationError(std::string(role) + " account name '" + std::string(name) + "' is empty or too long");
  }
}

template <typename Record>
void sort_by_time(std::vector<Record>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const Record& a, const Record& b) { return a.time < b.time; });
}

}  // namespace

void Dataset::require_mutable() const {
  if (frozen_) throw std::logic_error("dataset is frozen");
}

std::optional<TokenIndex> Dataset::find_token(const TokenId& id) const {
  if (auto it = token_index_.find(id); it != token_index_.end()) return it->second;
  return std::nullopt;
}

TokenIndex Dataset::intern_token(const TokenId& id) {
  if (auto it = token_index_.find(id); it != token_index_.end()) return it->second;
  auto index = static_cast<TokenIndex>(tokens_.size());
  tokens_.push_back(TokenInfo{id, std::nullopt, std::nullopt, 0});
  token_index_.emplace(id, index);
  return index;
}

void Dataset::check_quantity(const TokenId& token, const Quantity& q) const {
  if (q.symbol() != token.symbol) {
    throw ValidationError("quantity symbol " + q.symbol() + " does not match token " + token.to_string());
  }
  if (auto t = find_token(token); t && tokens_[*t].precision && *tokens_[*t].precision != q.precision()) {
    throw ValidationError("quantity " + q.to_string() + " has precision " + std::to_string(q.precision()) +
                          " but token " + token.to_string() + " uses " +
                          std::to_string(*tokens_[*t].precision));
  }
}

TextRef Dataset::store_text(std::string_view txid, std::string_view memo) {
  if (!retain_text_) return {};
  TextRef ref{text_.size(), static_cast<std::uint32_t>(txid.size()), static_cast<std::uint32_t>(memo.size())};
  text_.append(txid);
  text_.append(memo);
  return ref;
}

std::string_view Dataset::txid(const TextRef& ref) const {
  return std::string_view(text_).substr(ref.offset, ref.txid_len);
}

std::string_view Dataset::memo(const TextRef& ref) const {
  return std::string_view(text_).substr(ref.offset + ref.txid_len, ref.memo_len);
}

void Dataset::add_transfer(const TransferAction& a) {
  require_mutable();
  check_name("from", a.from);
  check_name("to", a.to);
  if (a.from == a.to) throw ValidationError("transfer from '" + a.from + "' to itself");
  check_quantity(a.token, a.quantity);
  if (a.quantity.mantissa() <= 0) throw ValidationError("transfer quantity must be positive");

  TokenIndex token = intern_token(a.token);
  tokens_[token].precision = a.quantity.precision();
  transfers_.push_back(TransferRecord{a.block_time, a.quantity.mantissa(), token, accounts_.intern(a.from),
                                      accounts_.intern(a.to), store_text(a.txid, a.memo)});
}

void Dataset::add_issue(const IssueAction& a) {
  require_mutable();
  check_name("issuer", a.issuer);
  check_name("to", a.to);
  check_quantity(a.token, a.quantity);
  if (a.quantity.mantissa() <= 0) throw ValidationError("issue quantity must be positive");

  TokenIndex token = intern_token(a.token);
  tokens_[token].precision = a.quantity.precision();
  tokens_[token].issue_total += a.quantity.mantissa();
  issues_.push_back(IssueRecord{a.block_time, a.quantity.mantissa(), token, accounts_.intern(a.issuer),
                                accounts_.intern(a.to), store_text(a.txid, a.memo)});
}

void Dataset::add_create(const CreateAction& a) {
  require_mutable();
  check_name("creator", a.creator);
  check_quantity(a.token, a.max_supply);
  if (auto t = find_token(a.token); t && tokens_[*t].create_record) {
    throw ValidationError("duplicate create for token " + a.token.to_string());
  }
  TokenIndex token = intern_token(a.token);
  tokens_[token].precision = a.max_supply.precision();
  tokens_[token].create_record = creates_.size();
  creates_.push_back(CreateRecord{a.block_time, a.max_supply.mantissa(), token, accounts_.intern(a.creator),
                                  store_text(a.txid, {})});
}

void Dataset::add_account_creation(const AccountCreation& a) {
  require_mutable();
  check_name("creator", a.creator);
  check_name("new", a.name);
  if (a.creator == a.name) throw ValidationError("account '" + a.name + "' cannot create itself");
  if (auto existing = accounts_.find(a.name);
      existing && *existing < created_names_.size() && created_names_[*existing]) {
    throw ValidationError("account '" + a.name + "' was already created");
  }
  AccountIndex creator = accounts_.intern(a.creator);
  AccountIndex name = accounts_.intern(a.name);
  if (created_names_.size() <= name) created_names_.resize(accounts_.size(), false);
  created_names_[name] = true;
  account_creations_.push_back(AccountRecord{a.block_time, creator, name, store_text(a.txid, {})});
}

void Dataset::freeze() {
  if (frozen_) return;
  sort_by_time(transfers_);
  sort_by_time(issues_);
  sort_by_time(creates_);
  sort_by_time(account_creations_);
  for (std::size_t i = 0; i < creates_.size(); ++i) tokens_[creates_[i].token].create_record = i;
  orphans_.clear();
  for (TokenIndex t = 0; t < tokens_.size(); ++t) {
    if (!tokens_[t].create_record) orphans_.push_back(t);
  }
  frozen_ = true;
}

TransferAction Dataset::transfer_action(std::size_t i) const {
  const TransferRecord& r = transfers_.at(i);
  const TokenInfo& info = tokens_[r.token];
  return TransferAction{std::string(txid(r.text)),
                        r.time,
                        info.id,
                        accounts_.name(r.from),
                        accounts_.name(r.to),
                        Quantity(r.amount, info.precision.value_or(0), info.id.symbol),
                        std::string(memo(r.text))};
}

Quantity Dataset::issue_total(TokenIndex token) const {
  const TokenInfo& info = tokens_.at(token);
  return Quantity(info.issue_total, info.precision.value_or(0), info.id.symbol);
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats s;
  s.n_creates = ds.creates().size();
  s.n_issues = ds.issues().size();
  s.n_transfers = ds.transfers().size();
  s.n_account_creations = ds.account_creations().size();
  s.n_tokens = ds.tokens().size();

  std::vector<bool> seen(ds.accounts().size(), false);
  for (const auto& t : ds.transfers()) {
    for (AccountIndex a : {t.from, t.to}) {
      if (!seen[a]) {
        seen[a] = true;
        ++s.n_holders;
      }
    }
  }
  std::fill(seen.begin(), seen.end(), false);
  for (const auto& c : ds.account_creations()) {
    if (!seen[c.creator]) {
      seen[c.creator] = true;
      ++s.n_creators;
    }
  }
  return s;
}

json to_json(const DatasetStats& s) {
  return json{{"n_creates", s.n_creates},
              {"n_issues", s.n_issues},
              {"n_transfers", s.n_transfers},
              {"n_account_creations", s.n_account_creations},
              {"n_tokens", s.n_tokens},
              {"n_holders", s.n_holders},
              {"n_creators", s.n_creators}};
}

// ---------------------------------------------------------------------------
// Line codecs

namespace {

const std::string& string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing key '") + key + "'", 0);
  if (!it->is_string()) throw ParseError(std::string("key '") + key + "' is not a string", 0);
  return it->get_ref<const std::string&>();
}

std::string optional_string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw ParseError(std::string("key '") + key + "' is not a string", 0);
  return it->get<std::string>();
}

json parse_object(std::string_view line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) throw ParseError("invalid JSON", 0);
  if (!obj.is_object()) throw ParseError("line is not a JSON object", 0);
  return obj;
}

std::string dump_line(const json& obj) {
  return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

TransferAction parse_transfer_line(std::string_view line) {
  json obj = parse_object(line);
  return TransferAction{string_field(obj, "txid"),
                        parse_timestamp(string_field(obj, "block_time")),
                        parse_token_id(string_field(obj, "token")),
                        string_field(obj, "from"),
                        string_field(obj, "to"),
                        parse_quantity(string_field(obj, "quantity")),
                        optional_string_field(obj, "memo")};
}

IssueAction parse_issue_line(std::string_view line) {
  json obj = parse_object(line);
  return IssueAction{string_field(obj, "txid"),
                     parse_timestamp(string_field(obj, "block_time")),
                     parse_token_id(string_field(obj, "token")),
                     string_field(obj, "issuer"),
                     string_field(obj, "to"),
                     parse_quantity(string_field(obj, "quantity")),
                     optional_string_field(obj, "memo")};
}

CreateAction parse_create_line(std::string_view line) {
  json obj = parse_object(line);
  return CreateAction{string_field(obj, "txid"), parse_timestamp(string_field(obj, "block_time")),
                      parse_token_id(string_field(obj, "token")), string_field(obj, "creator"),
                      parse_quantity(string_field(obj, "max_supply"))};
}

AccountCreation parse_account_line(std::string_view line) {
  json obj = parse_object(line);
  return AccountCreation{string_field(obj, "txid"), parse_timestamp(string_field(obj, "block_time")),
                         string_field(obj, "creator"), string_field(obj, "name")};
}

std::string to_jsonl(const TransferAction& a) {
  return dump_line(json{{"txid", a.txid},
                        {"block_time", format_timestamp(a.block_time)},
                        {"token", a.token.to_string()},
                        {"from", a.from},
                        {"to", a.to},
                        {"quantity", a.quantity.to_string()},
                        {"memo", a.memo}});
}

std::string to_jsonl(const IssueAction& a) {
  return dump_line(json{{"txid", a.txid},
                        {"block_time", format_timestamp(a.block_time)},
                        {"token", a.token.to_string()},
                        {"issuer", a.issuer},
                        {"to", a.to},
                        {"quantity", a.quantity.to_string()},
                        {"memo", a.memo}});
}

std::string to_jsonl(const CreateAction& a) {
  return dump_line(json{{"txid", a.txid},
                        {"block_time", format_timestamp(a.block_time)},
                        {"token", a.token.to_string()},
                        {"creator", a.creator},
                        {"max_supply", a.max_supply.to_string()}});
}

std::string to_jsonl(const AccountCreation& a) {
  return dump_line(json{{"txid", a.txid},
                        {"block_time", format_timestamp(a.block_time)},
                        {"creator", a.creator},
                        {"name", a.name}});
}

// ---------------------------------------------------------------------------
// Streaming

namespace {

void warn(FileReport& report, const IngestOptions& options, std::uint64_t line_no, const std::string& msg) {
  if (report.warnings.size() < options.max_warnings) {
    report.warnings.push_back("line " + std::to_string(line_no) + ": " + msg);
  }
}

void note_names(FileReport& report, std::initializer_list<std::string_view> names) {
  for (auto n : names) {
    if (check_account_name(n) == NameCheck::irregular) ++report.irregular_names;
  }
}

template <typename Action>
Action parse_line(std::string_view line);
template <>
TransferAction parse_line<TransferAction>(std::string_view line) { return parse_transfer_line(line); }
template <>
IssueAction parse_line<IssueAction>(std::string_view line) { return parse_issue_line(line); }
template <>
CreateAction parse_line<CreateAction>(std::string_view line) { return parse_create_line(line); }
template <>
AccountCreation parse_line<AccountCreation>(std::string_view line) { return parse_account_line(line); }

void inspect(FileReport& r, const TransferAction& a) {
  note_names(r, {a.from, a.to});
  if (!symbol_is_conventional(a.token.symbol)) ++r.unconventional_symbols;
}
void inspect(FileReport& r, const IssueAction& a) {
  note_names(r, {a.issuer, a.to});
  if (!symbol_is_conventional(a.token.symbol)) ++r.unconventional_symbols;
}
void inspect(FileReport& r, const CreateAction& a) {
  note_names(r, {a.creator});
  if (!symbol_is_conventional(a.token.symbol)) ++r.unconventional_symbols;
}
void inspect(FileReport& r, const AccountCreation& a) { note_names(r, {a.creator, a.name}); }

// Line numbers ride along with each buffered action so rejections downstream
// can still point at the source line.
template <typename Action>
struct Numbered {
  std::uint64_t line_no;
  Action action;
};

template <typename Action, typename Sink>
FileReport stream_file(const std::filesystem::path& path, ActionKind kind, const IngestOptions& options,
                       Sink&& sink) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());

  FileReport report;
  report.path = path.string();
  report.kind = kind;

  ReorderBuffer<Numbered<Action>> buffer(options.reorder_buffer);
  auto release = [&](Numbered<Action>&& n) { sink(report, n.line_no, std::move(n.action)); };

  std::string line;
  std::uint64_t line_no = 0;
  bool have_latest = false;
  Timestamp latest = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++report.lines;
    Action action;
    try {
      action = parse_line<Action>(line);
    } catch (const ParseError& e) {
      ++report.skipped;
      warn(report, options, line_no, std::string("malformed: ") + e.what());
      continue;
    }
    inspect(report, action);
    Timestamp t = action.block_time;
    if (have_latest && t < latest) ++report.out_of_order;
    if (!have_latest || t > latest) latest = t;
    have_latest = true;
    if (buffer.push(t, Numbered<Action>{line_no, std::move(action)}, release)) {
      ++report.beyond_reorder_buffer;
      warn(report, options, line_no, "timestamp earlier than the reorder window; kept in arrival order");
    }
  }
  if (in.bad()) throw IngestError("read error on " + path.string());
  buffer.flush(release);
  return report;
}

void add_to(Dataset& ds, TransferAction&& a) { ds.add_transfer(a); }
void add_to(Dataset& ds, IssueAction&& a) { ds.add_issue(a); }
void add_to(Dataset& ds, CreateAction&& a) { ds.add_create(a); }
void add_to(Dataset& ds, AccountCreation&& a) { ds.add_account_creation(a); }

template <typename Action>
FileReport ingest_one(Dataset& ds, const std::filesystem::path& path, ActionKind kind,
                      const IngestOptions& options) {
  return stream_file<Action>(path, kind, options,
                             [&](FileReport& report, std::uint64_t line_no, Action&& action) {
                               try {
                                 add_to(ds, std::move(action));
                                 ++report.accepted;
                               } catch (const ValidationError& e) {
                                 ++report.skipped;
                                 warn(report, options, line_no, e.what());
                               }
                             });
}

}  // namespace

FileReport stream_transfers(const std::filesystem::path& path, const std::function<void(TransferAction&&)>& sink,
                            const IngestOptions& options) {
  return stream_file<TransferAction>(path, ActionKind::transfer, options,
                                     [&](FileReport& report, std::uint64_t, TransferAction&& action) {
                                       ++report.accepted;
                                       sink(std::move(action));
                                     });
}

IngestReport ingest_files(Dataset& ds, std::span<const std::filesystem::path> paths, ActionKind kind,
                          const IngestOptions& options) {
  IngestReport report;
  for (const auto& path : paths) {
    switch (kind) {
      case ActionKind::transfer: report.files.push_back(ingest_one<TransferAction>(ds, path, kind, options)); break;
      case ActionKind::issue: report.files.push_back(ingest_one<IssueAction>(ds, path, kind, options)); break;
      case ActionKind::create: report.files.push_back(ingest_one<CreateAction>(ds, path, kind, options)); break;
      case ActionKind::account_creation:
        report.files.push_back(ingest_one<AccountCreation>(ds, path, kind, options));
        break;
    }
  }
  return report;
}

std::uint64_t IngestReport::accepted() const {
  std::uint64_t n = 0;
  for (const auto& f : files) n += f.accepted;
  return n;
}

std::uint64_t IngestReport::skipped() const {
  std::uint64_t n = 0;
  for (const auto& f : files) n += f.skipped;
  return n;
}

json to_json(const IngestReport& report) {
  json files = json::array();
  for (const auto& f : report.files) {
    files.push_back(json{{"path", f.path},
                         {"kind", std::string(to_string(f.kind))},
                         {"lines", f.lines},
                         {"accepted", f.accepted},
                         {"skipped", f.skipped},
                         {"out_of_order", f.out_of_order},
                         {"beyond_reorder_buffer", f.beyond_reorder_buffer},
                         {"irregular_names", f.irregular_names},
                         {"unconventional_symbols", f.unconventional_symbols},
                         {"warnings", f.warnings}});
  }
  return json{{"files", files}, {"accepted", report.accepted()}, {"skipped", report.skipped()}};
}

}  // namespace eoscope
