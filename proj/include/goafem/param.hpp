#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace goafem {

/// Finitely supported sequence of nonnegative integers, stored sparsely as
/// sorted (m, nu_m) pairs with nu_m >= 1 and m >= 1.
class MultiIndex {
 public:
  MultiIndex() = default;
  /// k * e_m.
  static MultiIndex unit(int m, int k = 1);
  /// Entries nu_1, nu_2, ... given densely.
  static MultiIndex from_dense(const std::vector<int>& entries);

  int operator[](int m) const;
  int degree() const { return degree_; }
  /// Largest m with nu_m > 0; 0 for the zero index.
  int max_param() const { return entries_.empty() ? 0 : entries_.back().first; }
  bool is_zero() const { return entries_.empty(); }
  const std::vector<std::pair<int, int>>& entries() const { return entries_; }

  /// nu + delta * e_m, or nothing if an entry would become negative.
  std::optional<MultiIndex> shifted(int m, int delta) const;

  /// "(0)" for the zero index, otherwise entries 1..max_param, e.g. "(0,1)".
  std::string to_string() const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.entries_ == b.entries_; }
  /// Graded lexicographic: total degree first, then larger leading entries first.
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b);

 private:
  std::vector<std::pair<int, int>> entries_;
  int degree_ = 0;
};

/// Sorted set of multi-indices; always contains the zero index.
class IndexSet {
 public:
  IndexSet();
  explicit IndexSet(std::vector<MultiIndex> indices);

  int size() const { return static_cast<int>(indices_.size()); }
  const MultiIndex& operator[](int k) const { return indices_[k]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  /// Position of nu, -1 if absent.
  int find(const MultiIndex& nu) const;
  bool contains(const MultiIndex& nu) const { return find(nu) >= 0; }
  /// Number of active parameters #supp(P).
  int num_active_params() const { return num_active_; }
  /// Largest active parameter index.
  int max_param() const { return max_param_; }

  IndexSet merged(const std::vector<MultiIndex>& extra) const;

  friend bool operator==(const IndexSet& a, const IndexSet& b) { return a.indices_ == b.indices_; }

 private:
  void finalize();

  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, int> position_;
  int num_active_ = 0;
  int max_param_ = 0;
};

/// Q = { nu +- e_m not in P : nu in P, 1 <= m <= #supp(P) + 1 }, sorted.
std::vector<MultiIndex> detail_set(const IndexSet& p);

/// Orthonormal Legendre polynomial of degree n for the measure dy/2 on [-1, 1].
double legendre_eval(int n, double y);

/// c_n = n / sqrt(4 n^2 - 1), the coefficient with y P_{n-1} = c_n P_n + c_{n-1} P_{n-2}.
double coupling_coeff(int n);

struct Coupling {
  enum class Kind { none, diagonal, offdiag };
  Kind kind = Kind::none;
  int m = 0;
  double weight = 0.0;  // int y_m P_nu P_mu dpi
};

Coupling coupling_weight(const MultiIndex& nu, const MultiIndex& mu);

}  // namespace goafem
