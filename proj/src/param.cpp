#include "goafem/param.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace goafem {

MultiIndex MultiIndex::unit(int m, int k) {
  if (m < 1 || k < 0) throw std::domain_error("invalid unit multi-index");
  MultiIndex nu;
  if (k > 0) {
    nu.entries_.emplace_back(m, k);
    nu.degree_ = k;
  }
  return nu;
}

MultiIndex MultiIndex::from_dense(const std::vector<int>& entries) {
  MultiIndex nu;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i] < 0) throw std::domain_error("negative multi-index entry");
    if (entries[i] > 0) {
      nu.entries_.emplace_back(static_cast<int>(i) + 1, entries[i]);
      nu.degree_ += entries[i];
    }
  }
  return nu;
}

int MultiIndex::operator[](int m) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{m, 0});
  return it != entries_.end() && it->first == m ? it->second : 0;
}

std::optional<MultiIndex> MultiIndex::shifted(int m, int delta) const {
  const int value = (*this)[m] + delta;
  if (value < 0) return std::nullopt;
  MultiIndex nu = *this;
  auto it = std::lower_bound(nu.entries_.begin(), nu.entries_.end(), std::pair{m, 0});
  if (it != nu.entries_.end() && it->first == m) {
    if (value == 0) {
      nu.entries_.erase(it);
    } else {
      it->second = value;
    }
  } else if (value > 0) {
    nu.entries_.insert(it, {m, value});
  }
  nu.degree_ += delta;
  return nu;
}

std::string MultiIndex::to_string() const {
  if (entries_.empty()) return "(0)";
  std::string s = "(";
  for (int m = 1; m <= max_param(); ++m) {
    if (m > 1) s += ',';
    s += std::to_string((*this)[m]);
  }
  return s + ")";
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
  if (auto c = a.degree_ <=> b.degree_; c != 0) return c;
  // Walk the dense sequences in parallel; the larger entry comes first.
  std::size_t i = 0, j = 0;
  while (i < a.entries_.size() || j < b.entries_.size()) {
    const int ma = i < a.entries_.size() ? a.entries_[i].first : INT32_MAX;
    const int mb = j < b.entries_.size() ? b.entries_[j].first : INT32_MAX;
    const int m = std::min(ma, mb);
    const int va = ma == m ? a.entries_[i].second : 0;
    const int vb = mb == m ? b.entries_[j].second : 0;
    if (va != vb) return vb <=> va;
    if (ma == m) ++i;
    if (mb == m) ++j;
  }
  return std::strong_ordering::equal;
}

IndexSet::IndexSet() : indices_{MultiIndex{}} { finalize(); }

IndexSet::IndexSet(std::vector<MultiIndex> indices) : indices_(std::move(indices)) {
  indices_.push_back(MultiIndex{});
  finalize();
}

void IndexSet::finalize() {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  position_.clear();
  std::set<int> support;
  for (int k = 0; k < size(); ++k) {
    position_.emplace(indices_[k], k);
    for (const auto& [m, v] : indices_[k].entries()) support.insert(m);
  }
  num_active_ = static_cast<int>(support.size());
  max_param_ = support.empty() ? 0 : *support.rbegin();
}

int IndexSet::find(const MultiIndex& nu) const {
  auto it = position_.find(nu);
  return it == position_.end() ? -1 : it->second;
}

IndexSet IndexSet::merged(const std::vector<MultiIndex>& extra) const {
  std::vector<MultiIndex> all = indices_;
  all.insert(all.end(), extra.begin(), extra.end());
  return IndexSet(std::move(all));
}

std::vector<MultiIndex> detail_set(const IndexSet& p) {
  std::set<MultiIndex> q;
  const int mmax = p.num_active_params() + 1;
  for (const auto& nu : p) {
    for (int m = 1; m <= mmax; ++m) {
      for (int delta : {1, -1}) {
        auto mu = nu.shifted(m, delta);
        if (mu && !p.contains(*mu)) q.insert(*mu);
      }
    }
  }
  return {q.begin(), q.end()};
}

double legendre_eval(int n, double y) {
  if (n < 0) throw std::domain_error("negative Legendre degree");
  // Recurrence for the orthonormal family: y P_k = c_{k+1} P_{k+1} + c_k P_{k-1}.
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = (y * cur - (k > 0 ? coupling_coeff(k) * prev : 0.0)) / coupling_coeff(k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

double coupling_coeff(int n) {
  if (n < 1) throw std::domain_error("coupling coefficient needs n >= 1");
  const double d = static_cast<double>(n);
  return d / std::sqrt(4.0 * d * d - 1.0);
}

Coupling coupling_weight(const MultiIndex& nu, const MultiIndex& mu) {
  if (nu == mu) return {Coupling::Kind::diagonal, 0, 0.0};
  if (std::abs(nu.degree() - mu.degree()) != 1) return {};
  // Find the single differing component.
  int diff_m = 0;
  int count = 0;
  auto visit = [&](int m) {
    if (nu[m] != mu[m]) {
      if (diff_m != m) ++count;
      diff_m = m;
    }
  };
  for (const auto& e : nu.entries()) visit(e.first);
  for (const auto& e : mu.entries()) visit(e.first);
  if (count != 1 || std::abs(nu[diff_m] - mu[diff_m]) != 1) return {};
  const int upper = std::max(nu[diff_m], mu[diff_m]);
  return {Coupling::Kind::offdiag, diff_m, coupling_coeff(upper)};
}

}  // namespace goafem
