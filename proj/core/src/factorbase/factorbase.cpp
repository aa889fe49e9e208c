#include "alphadesk/factorbase/factorbase.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "alphadesk/common/error.hpp"
#include "alphadesk/common/io.hpp"
#include "alphadesk/common/num.hpp"
#include "alphadesk/common/sha256.hpp"
#include "alphadesk/dsl/parser.hpp"

namespace alphadesk::factorbase {

namespace {

using ordered_json = nlohmann::ordered_json;

// Prerequisite edges restricted to record ids (meta fields are raw inputs).
std::set<std::string> id_prereqs(const FactorRecord& r,
                                 const std::map<std::string, std::size_t>& by_id) {
  std::set<std::string> out;
  for (const auto& dep : r.depends_on) {
    if (by_id.count(dep)) out.insert(dep);
  }
  return out;
}

// Deterministic cycle extraction: from the smallest stuck node, repeatedly
// hop to the smallest unfinished prerequisite until a node repeats.
[[noreturn]] void fail_cycle(const std::set<std::string>& stuck,
                             const std::map<std::string, std::set<std::string>>& prereqs) {
  std::vector<std::string> path;
  std::map<std::string, std::size_t> seen;
  std::string cur = *stuck.begin();
  while (!seen.count(cur)) {
    seen[cur] = path.size();
    path.push_back(cur);
    const std::set<std::string>& ps = prereqs.at(cur);
    std::string next;
    for (const auto& p : ps) {
      if (stuck.count(p)) {
        next = p;
        break;
      }
    }
    if (next.empty()) throw InternalError("cycle extraction lost its trail");
    cur = next;
  }
  std::string msg = "dependency cycle: ";
  for (std::size_t i = seen[cur]; i < path.size(); ++i) {
    msg += path[i];
    msg += " -> ";
  }
  msg += cur;
  throw DomainError(msg);
}

// Kahn's algorithm over the given records; ready set ordered by id so the
// result is unique. Throws DomainError when a cycle blocks completion.
std::vector<std::string> kahn_order(
    const std::set<std::string>& nodes,
    const std::map<std::string, std::set<std::string>>& prereqs) {
  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::set<std::string>> dependents;
  for (const auto& n : nodes) {
    std::size_t deg = 0;
    for (const auto& p : prereqs.at(n)) {
      if (nodes.count(p)) {
        ++deg;
        dependents[p].insert(n);
      }
    }
    indegree[n] = deg;
  }
  std::set<std::string> ready;
  for (const auto& [n, deg] : indegree) {
    if (deg == 0) ready.insert(n);
  }
  std::vector<std::string> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    std::string n = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(n);
    for (const auto& dep : dependents[n]) {
      if (--indegree[dep] == 0) ready.insert(dep);
    }
  }
  if (order.size() != nodes.size()) {
    std::set<std::string> stuck;
    for (const auto& [n, deg] : indegree) {
      if (deg > 0) stuck.insert(n);
    }
    fail_cycle(stuck, prereqs);
  }
  return order;
}

double json_double(const ordered_json& j, const char* key,
                   const std::string& where) {
  const auto& v = j.at(key);
  if (v.is_null()) return nan_value();
  if (!v.is_number()) throw DataError(where + ": field `" + key + "` must be a number or null");
  return v.get<double>();
}

ordered_json double_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string record_id(const std::string& canonical_expr_text) {
  return content_id(canonical_expr_text);
}

FactorRecord make_record(const std::string& expr_text, std::string name,
                         const metrics::FactorReport& report) {
  FactorRecord rec;
  dsl::ExprPtr expr = dsl::parse(expr_text);
  rec.expr_text = dsl::print(expr);
  rec.id = record_id(rec.expr_text);
  rec.name = std::move(name);
  rec.ic_mean = report.ic_mean;
  rec.ic_std = report.ic_std;
  rec.icir = report.icir;
  rec.annualized_return = report.annualized_return;
  rec.sharpe = report.sharpe;
  rec.max_drawdown = report.max_drawdown;
  rec.avg_turnover = report.avg_turnover;
  rec.max_abs_corr_to_base = report.max_abs_corr_to_base;
  rec.n_dates = report.n_dates_evaluated;
  for (const auto& f : dsl::required_fields(*expr)) rec.depends_on.insert(f);
  return rec;
}

const FactorRecord* FactorBase::find(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return nullptr;
  return &records_[it->second];
}

void FactorBase::check_record(const FactorRecord& record) const {
  dsl::ExprPtr expr;
  try {
    expr = dsl::parse(record.expr_text);
  } catch (const Error& e) {
    throw DataError("record " + record.id + ": expression does not parse: " + e.what());
  }
  std::string canonical = dsl::print(expr);
  if (canonical != record.expr_text) {
    throw DataError("record " + record.id + ": expression text is not canonical (expected `" +
                    canonical + "`)");
  }
  std::string want_id = record_id(record.expr_text);
  if (record.id != want_id) {
    throw DataError("integrity error: id " + record.id +
                    " does not match content hash " + want_id);
  }
  if (record.status != "active" && record.status != "retired") {
    throw DataError("record " + record.id + ": bad status `" + record.status + "`");
  }
  std::set<std::string> fields = dsl::required_fields(*expr);
  for (const auto& dep : record.depends_on) {
    if (dep == record.id) {
      throw DomainError("dependency cycle: " + record.id + " -> " + record.id);
    }
    if (!by_id_.count(dep) && !fields.count(dep)) {
      throw DataError("record " + record.id + ": unresolved dependency `" + dep + "`");
    }
  }
}

std::string FactorBase::commit(FactorRecord record) {
  // Canonicalize before hashing so structurally equal expressions collide.
  dsl::ExprPtr expr = dsl::parse(record.expr_text);
  record.expr_text = dsl::print(expr);
  std::string id = record_id(record.expr_text);
  if (record.id.empty()) {
    record.id = id;
  }
  if (by_id_.count(record.id)) {
    throw DataError("duplicate factor " + record.id + " (`" + record.expr_text + "`)");
  }
  for (const auto& f : dsl::required_fields(*expr)) record.depends_on.insert(f);
  check_record(record);
  // Acyclicity is preserved incrementally: every dependency of the new
  // record already exists in an acyclic base and nothing depends on the new
  // id yet, so no edge added here can close a loop (self-edges are rejected
  // by check_record).
  by_id_[record.id] = records_.size();
  records_.push_back(std::move(record));
  return records_.back().id;
}

std::vector<std::string> FactorBase::schedule(
    const std::vector<std::string>& targets) const {
  std::map<std::string, std::set<std::string>> prereqs;
  std::set<std::string> nodes;
  std::vector<std::string> frontier;
  for (const auto& t : targets) {
    if (!by_id_.count(t)) throw DataError("schedule: unknown target " + t);
    if (nodes.insert(t).second) frontier.push_back(t);
  }
  while (!frontier.empty()) {
    std::string cur = frontier.back();
    frontier.pop_back();
    const FactorRecord& rec = records_[by_id_.at(cur)];
    auto ps = id_prereqs(rec, by_id_);
    for (const auto& p : ps) {
      if (nodes.insert(p).second) frontier.push_back(p);
    }
    prereqs[cur] = std::move(ps);
  }
  return kahn_order(nodes, prereqs);
}

std::string FactorBase::serialize() const {
  std::string out;
  for (const auto& r : records_) {
    ordered_json j;
    j["id"] = r.id;
    j["name"] = r.name;
    j["expr"] = r.expr_text;
    j["created_at"] = r.created_at;
    j["ic_mean"] = double_json(r.ic_mean);
    j["ic_std"] = double_json(r.ic_std);
    j["icir"] = double_json(r.icir);
    j["annualized_return"] = double_json(r.annualized_return);
    j["sharpe"] = double_json(r.sharpe);
    j["max_drawdown"] = double_json(r.max_drawdown);
    j["avg_turnover"] = double_json(r.avg_turnover);
    j["max_abs_corr_to_base"] = double_json(r.max_abs_corr_to_base);
    j["n_dates"] = r.n_dates;
    j["depends_on"] = r.depends_on;
    j["status"] = r.status;
    out += j.dump();
    out += '\n';
  }
  return out;
}

FactorBase FactorBase::deserialize(const std::string& text,
                                   const std::string& origin) {
  FactorBase base;
  auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    std::string where = origin + ":" + std::to_string(ln + 1);
    ordered_json j;
    try {
      j = ordered_json::parse(lines[ln]);
    } catch (const std::exception& e) {
      throw DataError(where + ": corrupt line: " + e.what());
    }
    FactorRecord r;
    try {
      r.id = j.at("id").get<std::string>();
      r.name = j.at("name").get<std::string>();
      r.expr_text = j.at("expr").get<std::string>();
      r.created_at = j.at("created_at").get<std::string>();
      r.ic_mean = json_double(j, "ic_mean", where);
      r.ic_std = json_double(j, "ic_std", where);
      r.icir = json_double(j, "icir", where);
      r.annualized_return = json_double(j, "annualized_return", where);
      r.sharpe = json_double(j, "sharpe", where);
      r.max_drawdown = json_double(j, "max_drawdown", where);
      r.avg_turnover = json_double(j, "avg_turnover", where);
      r.max_abs_corr_to_base = json_double(j, "max_abs_corr_to_base", where);
      r.n_dates = j.at("n_dates").get<std::size_t>();
      r.depends_on = j.at("depends_on").get<std::set<std::string>>();
      r.status = j.at("status").get<std::string>();
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(where + ": corrupt line: " + e.what());
    }
    if (base.by_id_.count(r.id)) {
      throw DataError(where + ": duplicate factor " + r.id);
    }
    base.by_id_[r.id] = base.records_.size();
    base.records_.push_back(std::move(r));
  }
  // Second phase: full-set validation, so forward references load cleanly
  // and hand-crafted cycles are reported as such rather than as unresolved
  // dependencies.
  for (const auto& r : base.records_) {
    try {
      base.check_record(r);
    } catch (const DomainError&) {
      throw;
    } catch (const Error& e) {
      throw DataError(origin + ": " + e.what());
    }
  }
  std::set<std::string> nodes;
  std::map<std::string, std::set<std::string>> prereqs;
  for (const auto& r : base.records_) {
    nodes.insert(r.id);
    prereqs[r.id] = id_prereqs(r, base.by_id_);
  }
  kahn_order(nodes, prereqs);  // throws DomainError on cycles
  return base;
}

void FactorBase::save(const std::string& path) const {
  write_file_atomic(path, serialize());
}

FactorBase FactorBase::load(const std::string& path) {
  return deserialize(read_file(path), path);
}

}  // namespace alphadesk::factorbase
