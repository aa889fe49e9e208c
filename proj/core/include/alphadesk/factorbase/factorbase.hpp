#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "alphadesk/metrics/report.hpp"

namespace alphadesk::factorbase {

// One persisted factor. id is the content hash (first 128 bits of SHA-256,
// hex) of the canonical expression text, so structurally equal expressions
// share an id across processes and machines.
struct FactorRecord {
  std::string id;
  std::string name;
  std::string expr_text;  // canonical form (dsl::print of the parsed tree)
  std::string created_at = "1970-01-01T00:00:00Z";
  double ic_mean = 0.0;
  double ic_std = 0.0;
  double icir = 0.0;
  double annualized_return = 0.0;
  double sharpe = 0.0;
  double max_drawdown = 0.0;
  double avg_turnover = 0.0;
  double max_abs_corr_to_base = 0.0;
  std::size_t n_dates = 0;
  std::set<std::string> depends_on;  // record ids and/or meta field names
  std::string status = "active";     // active | retired
};

std::string record_id(const std::string& canonical_expr_text);

FactorRecord make_record(const std::string& expr_text, std::string name,
                         const metrics::FactorReport& report);

class FactorBase {
 public:
  const std::vector<FactorRecord>& records() const { return records_; }
  const FactorRecord* find(const std::string& id) const;
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }

  // Validates (expression parses and is canonicalized, id matches content,
  // dependencies resolve, acyclicity preserved), appends, returns the id.
  std::string commit(FactorRecord record);

  // Targets plus all transitive prerequisite records in dependency order;
  // simultaneously-ready records ordered by id ascending. Meta-field
  // dependencies are inputs, not scheduled nodes.
  std::vector<std::string> schedule(const std::vector<std::string>& targets) const;

  std::string serialize() const;
  static FactorBase deserialize(const std::string& text,
                                const std::string& origin);

  void save(const std::string& path) const;
  static FactorBase load(const std::string& path);

 private:
  void check_record(const FactorRecord& record) const;

  std::vector<FactorRecord> records_;         // append order
  std::map<std::string, std::size_t> by_id_;  // id -> index in records_
};

}  // namespace alphadesk::factorbase
