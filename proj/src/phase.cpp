#include "hicrit/phase.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hicrit {

double detection_boundary(double vartheta) {
  if (!(vartheta > 0.5 && vartheta < 1.0)) {
    throw InvalidInput(fmt::format("detection_boundary: vartheta = {} outside (1/2, 1)", vartheta));
  }
  if (vartheta <= 0.75) return vartheta - 0.5;
  const double root = 1.0 - std::sqrt(1.0 - vartheta);
  return root * root;
}

double detection_boundary_extended(double vartheta) {
  if (!(vartheta > 0.0 && vartheta < 1.0)) {
    throw InvalidInput(fmt::format("detection_boundary: vartheta = {} outside (0, 1)", vartheta));
  }
  return vartheta <= 0.5 ? 0.0 : detection_boundary(vartheta);
}

double classification_boundary(double vartheta, double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw InvalidInput("classification_boundary: theta must lie in [0, 1)");
  if (!(vartheta > 0.0 && vartheta < 1.0 - theta)) {
    throw InvalidInput(fmt::format("classification_boundary: vartheta = {} outside (0, 1 - theta)", vartheta));
  }
  return (1.0 - theta) * detection_boundary_extended(vartheta / (1.0 - theta));
}

std::string_view to_string(FdrPhase phase) {
  switch (phase) {
    case FdrPhase::I: return "I";
    case FdrPhase::II: return "II";
    case FdrPhase::III: return "III";
    case FdrPhase::boundary: return "boundary";
  }
  return "?";
}

IdealFdr ideal_fdr(double vartheta, double r, double theta) {
  const double floor_r = classification_boundary(vartheta, theta);
  if (!(r > floor_r + kBoundaryTolerance)) {
    throw FailureRegion(fmt::format("ideal_fdr: r = {} is not above rho_theta(vartheta) = {}", r, floor_r));
  }
  const double middle = (vartheta - r) / (2.0 * r);
  if (std::fabs(r - vartheta) <= kBoundaryTolerance || std::fabs(r - vartheta / 3.0) <= kBoundaryTolerance) {
    return {middle, FdrPhase::boundary};
  }
  if (r > vartheta) return {0.0, FdrPhase::I};
  if (r > vartheta / 3.0) return {middle, FdrPhase::II};
  return {1.0, FdrPhase::III};
}

std::string_view to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::undetectable: return "undetectable";
    case RegionLabel::detectable: return "detectable";
    case RegionLabel::failure: return "failure";
    case RegionLabel::success_I: return "success_I";
    case RegionLabel::success_II: return "success_II";
    case RegionLabel::success_III: return "success_III";
    case RegionLabel::boundary: return "boundary";
  }
  return "?";
}

namespace {

// -1 below, +1 above, 0 on the curve after applying the side preference.
int side_of(double r, double curve, SidePreference pref) {
  if (std::fabs(r - curve) <= kBoundaryTolerance) {
    return pref == SidePreference::below ? -1 : (pref == SidePreference::above ? 1 : 0);
  }
  return r < curve ? -1 : 1;
}

}  // namespace

RegionLabel classify_region(const PhasePoint& pt, PhaseMode mode, SidePreference side) {
  if (!(pt.r > 0.0)) throw InvalidInput("classify_region: r must be positive");
  if (mode == PhaseMode::detection) {
    const int s = side_of(pt.r, detection_boundary_extended(pt.vartheta), side);
    return s == 0 ? RegionLabel::boundary : (s < 0 ? RegionLabel::undetectable : RegionLabel::detectable);
  }

  const int s = side_of(pt.r, classification_boundary(pt.vartheta, pt.theta), side);
  if (s == 0) return RegionLabel::boundary;
  if (s < 0) return RegionLabel::failure;

  const int upper = side_of(pt.r, pt.vartheta, side);
  if (upper == 0) return RegionLabel::boundary;
  if (upper > 0) return RegionLabel::success_I;
  const int lower = side_of(pt.r, pt.vartheta / 3.0, side);
  if (lower == 0) return RegionLabel::boundary;
  return lower > 0 ? RegionLabel::success_II : RegionLabel::success_III;
}

std::vector<PhaseRow> boundary_table(double theta, std::size_t grid, double r) {
  if (!(theta >= 0.0 && theta < 1.0)) throw InvalidInput("boundary_table: theta must lie in [0, 1)");
  if (grid < 1) throw InvalidInput("boundary_table: grid must be positive");
  std::vector<PhaseRow> rows;
  rows.reserve(grid);
  const double width = 1.0 - theta;
  for (std::size_t k = 1; k <= grid; ++k) {
    PhaseRow row;
    row.vartheta = width * static_cast<double>(k) / static_cast<double>(grid + 1);
    row.rho = detection_boundary_extended(row.vartheta);
    row.rho_theta = classification_boundary(row.vartheta, theta);
    if (r > row.rho_theta + kBoundaryTolerance) {
      const auto q = ideal_fdr(row.vartheta, r, theta);
      row.qideal_phase = to_string(q.phase);
      row.qideal_value = q.value;
    } else {
      row.qideal_phase = "failure";
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hicrit
