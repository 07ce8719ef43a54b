#include "goafem/goals.hpp"

namespace goafem {

namespace {
constexpr Point kDirection{1.0, 1.0};
}

std::string to_string(GoalKind kind) {
  switch (kind) {
    case GoalKind::weighted_l2_sq: return "weighted_l2_sq";
    case GoalKind::convection: return "convection";
    case GoalKind::second_moment: return "second_moment";
    case GoalKind::variance: return "variance";
  }
  return "unknown";
}

Weight mollifier_weight(Point x0, double r) { return Weight::mollifier(x0, r); }

GoalFunctional::GoalFunctional(GoalKind kind, Weight weight, double scale)
    : kind_(kind), weight_(std::move(weight)), scale_(scale) {}

GoalFunctional GoalFunctional::for_setup(int setup) {
  switch (setup) {
    case 1:
      return {GoalKind::weighted_l2_sq,
              Weight::normalized_polygon({{5.0 / 8, 9.0 / 16}, {7.0 / 8, 9.0 / 16}, {7.0 / 8, 13.0 / 16},
                                          {5.0 / 8, 13.0 / 16}})};
    case 2:
      return {GoalKind::convection, Weight::normalized_polygon({{1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}})};
    case 3:
      return {GoalKind::second_moment,
              Weight::normalized_polygon({{1.0, 0.5}, {1.0, 1.0}, {0.5, 1.0}}), 100.0};
    case 4:
      return {GoalKind::variance, mollifier_weight({0.4, -0.5}, 0.15), 100.0};
    default: throw ConfigError("unknown setup id " + std::to_string(setup));
  }
}

double GoalFunctional::value(const MultilevelStructure& s, const MlFunction& u) const {
  double sum = 0.0;
  for (int k = 0; k < s.size(); ++k) {
    const FeSpace& x = s.space(k);
    const Vector& uk = u.blocks[k];
    switch (kind_) {
      case GoalKind::weighted_l2_sq: sum += uk.dot(weighted_mass_apply(x, x, weight_, uk)); break;
      case GoalKind::convection: sum += convection_value(x, weight_, kDirection, uk); break;
      case GoalKind::variance:
        if (s.index(k).is_zero()) break;
        [[fallthrough]];
      case GoalKind::second_moment: {
        const double l = functional_lw(x, weight_, uk);
        sum += l * l;
        break;
      }
    }
  }
  return scale_ * sum;
}

Vector GoalFunctional::derivative_block(const MultilevelStructure& s, const MlFunction& w,
                                        const MultiIndex& nu, const FeSpace& target) const {
  const int k = s.indices().find(nu);
  if (k < 0 || scale_ == 0.0) return Vector::Zero(target.dim());
  const FeSpace& src = s.space(k);
  const Vector& wk = w.blocks[k];
  switch (kind_) {
    case GoalKind::weighted_l2_sq: return 2.0 * scale_ * weighted_mass_apply(target, src, weight_, wk);
    case GoalKind::convection: return scale_ * convection_load(target, src, weight_, kDirection, wk);
    case GoalKind::variance:
      if (nu.is_zero()) return Vector::Zero(target.dim());
      [[fallthrough]];
    case GoalKind::second_moment: {
      const double l = functional_lw(src, weight_, wk);
      if (l == 0.0) return Vector::Zero(target.dim());
      return 2.0 * scale_ * l * load_weight(target, weight_);
    }
  }
  return Vector::Zero(target.dim());
}

MlFunction GoalFunctional::derivative_load(const MultilevelStructure& s, const MlFunction& w) const {
  MlFunction out;
  out.blocks.reserve(s.size());
  for (int k = 0; k < s.size(); ++k) {
    out.blocks.push_back(derivative_block(s, w, s.index(k), s.space(k)));
  }
  return out;
}

}  // namespace goafem
