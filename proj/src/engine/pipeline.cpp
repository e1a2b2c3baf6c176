#include "umjoin/engine/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <numeric>
#include <random>
#include <unordered_map>

#include "json.hpp"
#include "umjoin/core/error.hpp"
#include "umjoin/engine/bjt.hpp"
#include "umjoin/engine/umjoin.hpp"

namespace umjoin::engine {

std::string_view to_string(EngineMode mode) {
  switch (mode) {
    case EngineMode::kUmjoin: return "umjoin";
    case EngineMode::kBjt: return "bjt";
    case EngineMode::kCappedHash: return "capped_hash";
  }
  return "?";
}

std::optional<EngineMode> parse_mode(std::string_view text) {
  for (auto m : {EngineMode::kUmjoin, EngineMode::kBjt, EngineMode::kCappedHash}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::vector<SourceInfo> plan_sources(const plan::Plan& p) {
  std::vector<SourceInfo> out;
  for (const auto* n : plan::get_ordered_nodes(p.root())) {
    if (n->is(plan::NodeKind::kScan)) out.push_back({n->id, n->alias, n->table});
  }
  std::sort(out.begin(), out.end(), [](const SourceInfo& a, const SourceInfo& b) { return a.alias < b.alias; });
  return out;
}

std::vector<std::size_t> source_counts(const plan::Plan& p, const Catalog& tables) {
  std::vector<std::size_t> out;
  for (const auto& s : plan_sources(p)) {
    const auto it = tables.find(s.table);
    if (it == tables.end()) throw ConfigError("no data for table '" + s.table + "'");
    out.push_back(it->second.rows.size());
  }
  return out;
}

std::vector<std::size_t> round_robin_schedule(std::span<const std::size_t> counts) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> left(counts.begin(), counts.end());
  bool any = true;
  while (any) {
    any = false;
    for (std::size_t s = 0; s < left.size(); ++s) {
      if (left[s] == 0) continue;
      --left[s];
      out.push_back(s);
      any = true;
    }
  }
  return out;
}

std::vector<std::size_t> random_schedule(std::span<const std::size_t> counts, std::uint64_t seed) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < counts.size(); ++s) out.insert(out.end(), counts[s], s);
  // Fisher-Yates with an explicit unbiased bound so the order does not depend
  // on the standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  for (std::size_t i = out.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = 0;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(out[i - 1], out[r % bound]);
  }
  return out;
}

std::vector<std::size_t> parse_schedule(std::string_view text) {
  std::vector<std::size_t> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty()) continue;
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw ConfigError("schedule line " + std::to_string(line_no) + " is not a stream index");
    }
    out.push_back(v);
  }
  return out;
}

void check_schedule(std::span<const std::size_t> schedule, std::span<const std::size_t> counts) {
  std::vector<std::size_t> seen(counts.size(), 0);
  for (auto s : schedule) {
    if (s >= counts.size()) throw ConfigError("schedule names stream " + std::to_string(s) + " which does not exist");
    ++seen[s];
  }
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (seen[s] != counts[s]) {
      throw ConfigError("schedule has " + std::to_string(seen[s]) + " events for stream " + std::to_string(s) +
                        " but it holds " + std::to_string(counts[s]) + " tuples");
    }
  }
}

namespace {

using plan::NodeKind;
using plan::PlanNode;

struct RunContext {
  bool collect = false;
  std::uint64_t outputs = 0;
  std::uint64_t intermediate = 0;
  std::uint64_t rejected = 0;
  std::uint64_t state_bytes = 0;
  std::vector<Row> rows;
};

class Op;
struct Consumer {
  Op* op;
  std::size_t port;
};

class Op {
 public:
  virtual ~Op() = default;
  virtual void push(std::size_t port, const Row& row, std::uint64_t ts, RunContext& ctx) = 0;

  std::string id;
  std::vector<Field> columns;
  std::vector<Consumer> consumers;
  bool feeds_join = false;

 protected:
  void emit(const Row& row, std::uint64_t ts, RunContext& ctx) {
    if (consumers.empty()) {
      ++ctx.outputs;
      if (ctx.collect) ctx.rows.push_back(row);
      return;
    }
    for (const auto& c : consumers) c.op->push(c.port, row, ts, ctx);
  }
  bool counting_sink(const RunContext& ctx) const { return consumers.empty() && !ctx.collect; }
};

class ScanOp final : public Op {
 public:
  void push(std::size_t, const Row& row, std::uint64_t ts, RunContext& ctx) override {
    if (row.size() != columns.size()) throw RejectedEventError("malformed tuple for scan '" + id + "'");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (type_of(row[i]) != columns[i].type) throw RejectedEventError("mistyped field in scan '" + id + "'");
    }
    emit(row, ts, ctx);
  }
};

class PassOp final : public Op {
 public:
  void push(std::size_t, const Row& row, std::uint64_t ts, RunContext& ctx) override { emit(row, ts, ctx); }
};

class ProjectOp final : public Op {
 public:
  std::vector<std::size_t> keep;
  void push(std::size_t, const Row& row, std::uint64_t ts, RunContext& ctx) override {
    Row out;
    out.reserve(keep.size());
    for (auto i : keep) out.push_back(row[i]);
    emit(out, ts, ctx);
  }
};

// A store wrapper that charges every stored tuple to the run's state size.
class CountingStore final : public StateStore {
 public:
  CountingStore(std::unique_ptr<StateStore> inner, RunContext& ctx) : inner_(std::move(inner)), ctx_(ctx) {}
  void insert(const JoinKey& key, lsm::StoredTuple tuple) override {
    ctx_.state_bytes += MemoryBudget::charge_for(key, tuple);
    inner_->insert(key, std::move(tuple));
  }
  std::vector<lsm::StoredTuple> probe(const JoinKey& key) override { return inner_->probe(key); }
  lsm::BackendCounters counters() const override { return inner_->counters(); }

 private:
  std::unique_ptr<StateStore> inner_;
  RunContext& ctx_;
};

class MultiJoinOp final : public Op {
 public:
  std::unique_ptr<UMJoinOperator> join;
  std::vector<std::vector<std::size_t>> key_pos;             // per input port
  std::vector<std::pair<std::size_t, std::size_t>> out_cols;  // (input, column)

  void push(std::size_t port, const Row& row, std::uint64_t ts, RunContext& ctx) override {
    const JoinKey key = extract_key(row, key_pos[port]);
    const JoinResult r = join->process_encoded(port, key, encode_row(row), ts);
    const auto n = r.row_count();
    if (feeds_join) ctx.intermediate += n;
    if (n == 0) return;
    if (counting_sink(ctx)) {
      ctx.outputs += n;
      return;
    }
    // Decode every contributing tuple once, then expand the product.
    std::vector<std::vector<Row>> decoded(r.probes.size());
    for (std::size_t s = 0; s < r.probes.size(); ++s) {
      if (s == r.stream) {
        decoded[s].push_back(row);
        continue;
      }
      for (const auto& t : r.probes[s]) decoded[s].push_back(decode_row(t.payload));
    }
    r.for_each_row([&](std::span<const lsm::StoredTuple* const> parts) {
      Row out;
      out.reserve(out_cols.size());
      for (auto [input, col] : out_cols) {
        const std::size_t idx = input == r.stream ? 0 : static_cast<std::size_t>(parts[input] - r.probes[input].data());
        out.push_back(decoded[input][idx][col]);
      }
      emit(out, ts, ctx);
    });
  }
};

class BjtOp final : public Op {
 public:
  std::unique_ptr<BjtNode> node;
  std::vector<std::size_t> key_pos[2];
  // Output column mapping over the concatenated (left ++ right) row; empty = identity.
  std::vector<std::size_t> reorder;

  void push(std::size_t port, const Row& row, std::uint64_t ts, RunContext& ctx) override {
    const JoinKey key = extract_key(row, key_pos[port]);
    auto matches = node->process(port == 0 ? Side::kLeft : Side::kRight, key, encode_row(row), ts);
    if (feeds_join) ctx.intermediate += matches.size();
    if (matches.empty()) return;
    if (counting_sink(ctx)) {
      ctx.outputs += matches.size();
      return;
    }
    for (const auto& m : matches) {
      Row joined = port == 0 ? row : decode_row(m.left);
      Row right = port == 1 ? row : decode_row(m.right);
      joined.insert(joined.end(), std::make_move_iterator(right.begin()), std::make_move_iterator(right.end()));
      if (reorder.empty()) {
        emit(joined, ts, ctx);
      } else {
        Row out;
        out.reserve(reorder.size());
        for (auto i : reorder) out.push_back(joined[i]);
        emit(out, ts, ctx);
      }
    }
  }
};

std::size_t unique_column(const std::string& node_id, const std::vector<Field>& cols, const std::string& name) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].name != name) continue;
    if (found) throw ConfigError("node '" + node_id + "': ambiguous column '" + name + "'");
    found = i;
  }
  if (!found) throw ConfigError("node '" + node_id + "': unknown column '" + name + "'");
  return *found;
}

// For a multijoin whose conditions put every input on the same composite key:
// per input, the key column positions, one per equivalence class.
std::vector<std::vector<std::size_t>> shared_key_positions(const PlanNode& node,
                                                           const std::vector<std::vector<Field>>& inputs) {
  using Col = std::pair<std::size_t, std::size_t>;  // (input, column)
  std::vector<Col> cols;
  std::vector<std::size_t> parent;
  auto index_of = [&](Col c) {
    auto it = std::find(cols.begin(), cols.end(), c);
    if (it != cols.end()) return static_cast<std::size_t>(it - cols.begin());
    cols.push_back(c);
    parent.push_back(parent.size());
    return cols.size() - 1;
  };
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& c : node.join_keys) {
    const auto a = index_of({c.left.input, unique_column(node.id, inputs.at(c.left.input), c.left.field)});
    const auto b = index_of({c.right.input, unique_column(node.id, inputs.at(c.right.input), c.right.field)});
    parent[find(a)] = find(b);
  }
  std::vector<std::size_t> class_roots;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto r = find(i);
    if (std::find(class_roots.begin(), class_roots.end(), r) == class_roots.end()) class_roots.push_back(r);
  }
  std::vector<std::vector<std::size_t>> key_pos(inputs.size());
  for (auto root : class_roots) {
    std::vector<std::optional<std::size_t>> per_input(inputs.size());
    std::optional<FieldType> type;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (find(i) != root) continue;
      auto [input, col] = cols[i];
      if (per_input[input]) {
        throw ConfigError("node '" + node.id + "': input " + std::to_string(input) +
                          " has two columns in one key class");
      }
      per_input[input] = col;
      const auto t = inputs[input][col].type;
      if (type && *type != t) throw ConfigError("node '" + node.id + "': key columns of different types are equated");
      type = t;
    }
    for (std::size_t in = 0; in < inputs.size(); ++in) {
      if (!per_input[in]) {
        throw ConfigError("node '" + node.id + "': input " + std::to_string(in) +
                          " does not share the join key; a multi-way join needs one key common to all inputs");
      }
      key_pos[in].push_back(*per_input[in]);
    }
  }
  return key_pos;
}

std::vector<std::pair<std::size_t, std::size_t>> multijoin_outputs(const PlanNode& node,
                                                                    const std::vector<std::vector<Field>>& inputs) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (node.output.empty()) {
    for (std::size_t i = 0; i < inputs.size(); ++i)
      for (std::size_t c = 0; c < inputs[i].size(); ++c) out.emplace_back(i, c);
    return out;
  }
  for (const auto& o : node.output) {
    bool any = false;
    for (std::size_t c = 0; c < inputs.at(o.input).size(); ++c) {
      if (o.field == "*" || inputs[o.input][c].name == o.field) {
        out.emplace_back(o.input, c);
        any = true;
      }
    }
    if (!any) throw ConfigError("node '" + node.id + "': unknown output column '" + o.field + "'");
  }
  return out;
}

class Graph {
 public:
  Graph(const EngineConfig& config, const std::filesystem::path& state_dir, RunContext& ctx)
      : config_(config), state_dir_(state_dir), ctx_(ctx) {
    if (config.mode == EngineMode::kCappedHash) budget_ = std::make_shared<MemoryBudget>(config.cap_bytes);
  }

  Op* build(const PlanNode* node) {
    if (auto it = built_.find(node); it != built_.end()) return it->second;
    std::vector<Op*> ins;
    for (const PlanNode* in : node->inputs) ins.push_back(build(in));
    Op* op = nullptr;
    switch (node->kind) {
      case NodeKind::kScan: op = make_scan(*node); break;
      case NodeKind::kHash: {
        auto p = std::make_unique<PassOp>();
        p->columns = ins[0]->columns;
        op = adopt(std::move(p), node->id);
        break;
      }
      case NodeKind::kProject: op = make_project(*node, *ins[0]); break;
      case NodeKind::kJoin: op = make_join(*node, ins); break;
      case NodeKind::kMultiJoin:
        op = config_.mode == EngineMode::kBjt ? make_expanded(*node, ins) : make_multijoin(*node, ins);
        break;
    }
    if (!node->is(NodeKind::kMultiJoin) || config_.mode != EngineMode::kBjt) {
      for (std::size_t i = 0; i < ins.size(); ++i) ins[i]->consumers.push_back({op, i});
    }
    built_[node] = op;
    return op;
  }

  Op* op_for(const PlanNode* node) const { return built_.at(node); }

  // Marks joins whose output reaches another join through pass-through operators.
  void mark_intermediate() {
    for (auto& op : ops_) {
      if (joins_.contains(op.get())) op->feeds_join = reaches_join(op.get());
    }
  }

  std::map<std::string, lsm::BackendCounters> counters() const {
    std::map<std::string, lsm::BackendCounters> out;
    for (const auto& [name, store] : stores_) out[name] = store->counters();
    return out;
  }

 private:
  bool reaches_join(const Op* op) const {
    for (const auto& c : op->consumers) {
      if (joins_.contains(c.op) || reaches_join(c.op)) return true;
    }
    return false;
  }

  Op* adopt(std::unique_ptr<Op> op, std::string id) {
    op->id = std::move(id);
    ops_.push_back(std::move(op));
    return ops_.back().get();
  }

  std::unique_ptr<StateStore> make_store(const std::string& name) {
    std::unique_ptr<StateStore> inner;
    if (config_.mode == EngineMode::kCappedHash) {
      inner = std::make_unique<CappedHashStore>(budget_);
    } else {
      std::string dir;
      for (char c : name) dir += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
      inner = std::make_unique<LsmStore>(state_dir_ / dir, config_.backend);
    }
    auto store = std::make_unique<CountingStore>(std::move(inner), ctx_);
    stores_.emplace_back(name, store.get());
    return store;
  }

  Op* make_scan(const PlanNode& node) {
    auto op = std::make_unique<ScanOp>();
    op->columns = scan_columns.at(node.id);
    return adopt(std::move(op), node.id);
  }

  Op* make_project(const PlanNode& node, const Op& in) {
    auto op = std::make_unique<ProjectOp>();
    for (const auto& name : node.columns) {
      bool any = false;
      for (std::size_t i = 0; i < in.columns.size(); ++i) {
        if (in.columns[i].name != name) continue;
        op->keep.push_back(i);
        op->columns.push_back(in.columns[i]);
        any = true;
      }
      if (!any) throw ConfigError("node '" + node.id + "': unknown column '" + name + "'");
    }
    return adopt(std::move(op), node.id);
  }

  Op* make_join(const PlanNode& node, const std::vector<Op*>& ins) {
    if (config_.mode != EngineMode::kBjt) {
      throw ConfigError("plan contains binary join node '" + node.id + "'; convert it or run in bjt mode");
    }
    auto op = std::make_unique<BjtOp>();
    for (const auto& c : node.join_keys) {
      op->key_pos[c.left.input].push_back(unique_column(node.id, ins[c.left.input]->columns, c.left.field));
      op->key_pos[c.right.input].push_back(unique_column(node.id, ins[c.right.input]->columns, c.right.field));
      if (ins[c.left.input]->columns[op->key_pos[c.left.input].back()].type !=
          ins[c.right.input]->columns[op->key_pos[c.right.input].back()].type) {
        throw ConfigError("node '" + node.id + "': key columns of different types are equated");
      }
    }
    op->node = std::make_unique<BjtNode>(make_store(node.id + ".left"), make_store(node.id + ".right"));
    op->columns = ins[0]->columns;
    op->columns.insert(op->columns.end(), ins[1]->columns.begin(), ins[1]->columns.end());
    joins_.insert(op.get());
    return adopt(std::move(op), node.id);
  }

  Op* make_multijoin(const PlanNode& node, const std::vector<Op*>& ins) {
    std::vector<std::vector<Field>> in_cols;
    for (const Op* in : ins) in_cols.push_back(in->columns);
    auto op = std::make_unique<MultiJoinOp>();
    op->key_pos = shared_key_positions(node, in_cols);
    op->out_cols = multijoin_outputs(node, in_cols);
    for (auto [i, c] : op->out_cols) op->columns.push_back(in_cols[i][c]);

    std::vector<StreamDef> streams;
    std::vector<std::unique_ptr<StateStore>> stores;
    for (std::size_t i = 0; i < ins.size(); ++i) {
      StreamDef s;
      s.stream_index = i;
      s.name = ins[i]->id;
      for (const auto& f : in_cols[i]) s.schema.fields.push_back(f);
      for (auto p : op->key_pos[i]) s.key_fields.push_back(in_cols[i][p].name);
      streams.push_back(std::move(s));
      stores.push_back(make_store(node.id + "[" + std::to_string(i) + "]"));
    }
    op->join = std::make_unique<UMJoinOperator>(std::move(streams), std::move(stores));
    joins_.insert(op.get());
    return adopt(std::move(op), node.id);
  }

  // bjt mode: a multijoin becomes a left-deep chain of two-way joins over its
  // inputs taken in bjt_order; the top node restores the multijoin's columns.
  Op* make_expanded(const PlanNode& node, const std::vector<Op*>& ins) {
    std::vector<std::vector<Field>> in_cols;
    for (const Op* in : ins) in_cols.push_back(in->columns);
    const auto key_pos = shared_key_positions(node, in_cols);
    const auto out_cols = multijoin_outputs(node, in_cols);

    std::vector<std::size_t> order = config_.bjt_order;
    if (order.empty()) {
      order.resize(ins.size());
      std::iota(order.begin(), order.end(), 0);
    }
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted.size() != ins.size() || sorted[i] != i) {
        throw ConfigError("bjt order must be a permutation of the " + std::to_string(ins.size()) +
                          " inputs of node '" + node.id + "'");
      }
    }

    // Offset of each input's columns within the left-deep concatenation.
    std::vector<std::size_t> offset(ins.size());
    std::size_t width = 0;
    for (auto i : order) {
      offset[i] = width;
      width += in_cols[i].size();
    }

    Op* left = ins[order[0]];
    std::size_t left_input = order[0];
    for (std::size_t step = 1; step < order.size(); ++step) {
      const std::size_t right_input = order[step];
      auto op = std::make_unique<BjtOp>();
      const std::string id = node.id + "/bjt" + std::to_string(step);
      op->key_pos[0] = key_pos[left_input];
      for (auto& p : op->key_pos[0]) p += offset[left_input];
      op->key_pos[1] = key_pos[right_input];
      op->node = std::make_unique<BjtNode>(make_store(id + ".left"), make_store(id + ".right"));
      op->columns = left->columns;
      op->columns.insert(op->columns.end(), in_cols[right_input].begin(), in_cols[right_input].end());
      if (step + 1 == order.size()) {
        std::vector<Field> final_cols;
        for (auto [i, c] : out_cols) {
          op->reorder.push_back(offset[i] + c);
          final_cols.push_back(in_cols[i][c]);
        }
        op->columns = std::move(final_cols);
      }
      joins_.insert(op.get());
      Op* raw = adopt(std::move(op), id);
      left->consumers.push_back({raw, 0});
      ins[right_input]->consumers.push_back({raw, 1});
      left = raw;
    }
    return left;
  }

 public:
  std::unordered_map<std::string, std::vector<Field>> scan_columns;

 private:
  const EngineConfig& config_;
  std::filesystem::path state_dir_;
  RunContext& ctx_;
  std::shared_ptr<MemoryBudget> budget_;
  std::vector<std::unique_ptr<Op>> ops_;
  std::unordered_map<const PlanNode*, Op*> built_;
  std::set<const Op*> joins_;
  std::vector<std::pair<std::string, const StateStore*>> stores_;
};

class TempStateDir {
 public:
  explicit TempStateDir(std::filesystem::path requested) {
    if (!requested.empty()) {
      path_ = std::move(requested);
      std::filesystem::create_directories(path_);
      return;
    }
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("umjoin-run-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
    owned_ = true;
  }
  ~TempStateDir() {
    if (!owned_) return;
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool owned_ = false;
};

}  // namespace

MetricsReport run_pipeline(const plan::Plan& p, const Catalog& tables, std::span<const std::size_t> schedule,
                           const EngineConfig& config) {
  if (p.root() == nullptr) throw ConfigError("plan has no root");
  config.backend.validate();
  if (config.mode == EngineMode::kCappedHash && config.cap_bytes == 0) {
    throw ConfigError("capped_hash mode needs cap_bytes > 0");
  }
  if (config.sample_every == 0) throw ConfigError("sample_every must be positive");

  const auto sources = plan_sources(p);
  std::vector<const Table*> source_tables;
  std::vector<std::size_t> counts;
  for (const auto& s : sources) {
    auto it = tables.find(s.table);
    if (it == tables.end()) throw ConfigError("no data for table '" + s.table + "'");
    source_tables.push_back(&it->second);
    counts.push_back(it->second.rows.size());
  }
  check_schedule(schedule, counts);

  MetricsReport report;
  report.mode = config.mode;
  RunContext ctx;
  ctx.collect = config.collect_output;

  TempStateDir state_dir(config.state_dir);
  // Scope the graph so every backend is closed before the state directory goes away.
  {
    Graph graph(config, state_dir.path(), ctx);
    for (std::size_t i = 0; i < sources.size(); ++i) {
      std::vector<Field> cols;
      for (const auto& f : source_tables[i]->schema.fields) cols.push_back({sources[i].alias + "." + f.name, f.type});
      graph.scan_columns[sources[i].node_id] = std::move(cols);
    }
    Op* root = graph.build(p.root());
    graph.mark_intermediate();
    std::vector<Op*> source_ops;
    for (const auto& s : sources) source_ops.push_back(graph.op_for(p.find(s.node_id)));

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };
    auto sample = [&] {
      report.samples.push_back({elapsed(), report.events, ctx.outputs, graph.counters()});
    };

    std::vector<std::size_t> cursor(sources.size(), 0);
    for (const auto s : schedule) {
      const Row& row = source_tables[s]->rows[cursor[s]++];
      ++report.events;
      try {
        source_ops[s]->push(0, row, report.events, ctx);
      } catch (const RejectedEventError&) {
        ++ctx.rejected;
      } catch (const OutOfMemoryError& e) {
        report.aborted = true;
        report.abort_reason = e.what();
        break;
      }
      if (report.events % config.sample_every == 0) sample();
    }
    if (report.samples.empty() || report.samples.back().events != report.events) sample();

    report.elapsed_ms = elapsed();
    report.total_outputs = ctx.outputs;
    report.intermediate_rows = ctx.intermediate;
    report.rejected_events = ctx.rejected;
    report.state_bytes = ctx.state_bytes;
    report.per_stream = graph.counters();
    if (config.collect_output) report.output = Relation{root->columns, std::move(ctx.rows)};
  }
  return report;
}

namespace {

nlohmann::json counters_json(const lsm::BackendCounters& c) {
  return {{"blocks_read", c.blocks_read_from_disk}, {"cache_hits", c.cache_hits},
          {"cache_misses", c.cache_misses},         {"bytes_written", c.bytes_written},
          {"flush_count", c.flush_count},           {"compaction_count", c.compaction_count},
          {"probe_count", c.probe_count},           {"tuples_inserted", c.tuples_inserted}};
}

nlohmann::json per_stream_json(const std::map<std::string, lsm::BackendCounters>& m) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, c] : m) out[name] = counters_json(c);
  return out;
}

}  // namespace

void write_metrics_jsonl(const MetricsReport& report, std::ostream& out) {
  for (const auto& s : report.samples) {
    nlohmann::json j{{"t_ms", s.t_ms}, {"events", s.events}, {"outputs", s.outputs}, {"per_stream", per_stream_json(s.per_stream)}};
    out << j.dump() << '\n';
  }
  nlohmann::json f{{"final", true},
                   {"mode", std::string(to_string(report.mode))},
                   {"events", report.events},
                   {"outputs", report.total_outputs},
                   {"intermediate_rows", report.intermediate_rows},
                   {"rejected_events", report.rejected_events},
                   {"state_bytes", report.state_bytes},
                   {"aborted", report.aborted},
                   {"elapsed_ms", report.elapsed_ms},
                   {"per_stream", per_stream_json(report.per_stream)}};
  if (report.aborted) f["abort_reason"] = report.abort_reason;
  out << f.dump() << '\n';
}

}  // namespace umjoin::engine
