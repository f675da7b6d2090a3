// Tallied measurement outcomes per basis setting.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ionnode {

class CountsTable {
 public:
  CountsTable() = default;
  explicit CountsTable(std::string setting) : setting_(std::move(setting)) {}

  const std::string& setting() const { return setting_; }
  void set_setting(std::string s) { setting_ = std::move(s); }

  /// Adds `n` (>= 0) to the tally of `outcome`.
  void add(const std::string& outcome, std::int64_t n = 1);
  std::int64_t count(const std::string& outcome) const;
  std::int64_t total() const;
  /// count / total; throws ContractError on an empty table.
  double frequency(const std::string& outcome) const;
  const std::map<std::string, std::int64_t>& outcomes() const { return counts_; }

  friend bool operator==(const CountsTable&, const CountsTable&) = default;

 private:
  std::string setting_;
  std::map<std::string, std::int64_t> counts_;
};

/// CSV with header `setting,outcome,count`, one row per (table, outcome).
void write_counts_csv(std::ostream& os, const std::vector<CountsTable>& tables);
std::vector<CountsTable> read_counts_csv(std::istream& is);

}  // namespace ionnode
