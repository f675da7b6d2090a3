#include "ionnode/counts.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "ionnode/qcore.hpp"

namespace ionnode {

void CountsTable::add(const std::string& outcome, std::int64_t n) {
  if (n < 0) throw ContractError("CountsTable: negative count for '" + outcome + "'");
  if (outcome.empty() || outcome.find(',') != std::string::npos)
    throw ContractError("CountsTable: outcome labels must be nonempty and comma-free");
  counts_[outcome] += n;
}

std::int64_t CountsTable::count(const std::string& outcome) const {
  auto it = counts_.find(outcome);
  return it == counts_.end() ? 0 : it->second;
}

std::int64_t CountsTable::total() const {
  std::int64_t t = 0;
  for (const auto& [_, n] : counts_) t += n;
  return t;
}

double CountsTable::frequency(const std::string& outcome) const {
  const auto t = total();
  if (t <= 0) throw ContractError("CountsTable '" + setting_ + "': no counts");
  return static_cast<double>(count(outcome)) / static_cast<double>(t);
}

void write_counts_csv(std::ostream& os, const std::vector<CountsTable>& tables) {
  os << "setting,outcome,count\n";
  for (const auto& t : tables)
    for (const auto& [o, n] : t.outcomes()) os << t.setting() << ',' << o << ',' << n << '\n';
}

std::vector<CountsTable> read_counts_csv(std::istream& is) {
  std::vector<CountsTable> out;
  std::string line;
  if (!std::getline(is, line) || line != "setting,outcome,count")
    throw ContractError("counts CSV: missing header 'setting,outcome,count'");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string setting, outcome, count;
    if (!std::getline(ss, setting, ',') || !std::getline(ss, outcome, ',') || !std::getline(ss, count))
      throw ContractError("counts CSV line " + std::to_string(lineno) + ": expected three fields");
    std::int64_t n = 0;
    try {
      std::size_t used = 0;
      n = std::stoll(count, &used);
      if (used != count.size()) throw std::invalid_argument(count);
    } catch (const std::exception&) {
      throw ContractError("counts CSV line " + std::to_string(lineno) + ": bad count '" + count + "'");
    }
    if (out.empty() || out.back().setting() != setting) out.emplace_back(setting);
    out.back().add(outcome, n);
  }
  return out;
}

}  // namespace ionnode
