#pragma once

// Closed-form rare/weak phase diagram: detection boundary rho(vartheta),
// classification boundary rho_theta(vartheta), the leading term of the ideal
// FDR level, and region labels for plotting.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "hicrit/errors.hpp"

namespace hicrit {

/// (vartheta, r) lies on or below the classification boundary.
class FailureRegion : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

inline constexpr double kBoundaryTolerance = 1e-12;

/// rho(vartheta) on 1/2 < vartheta < 1.
double detection_boundary(double vartheta);

/// rho extended by 0 on (0, 1/2], defined on (0, 1).
double detection_boundary_extended(double vartheta);

/// (1 - theta) rho(vartheta / (1 - theta)) on 0 < vartheta < 1 - theta,
/// using the zero extension of rho.
double classification_boundary(double vartheta, double theta);

enum class FdrPhase { I, II, III, boundary };

std::string_view to_string(FdrPhase phase);

struct IdealFdr {
  double value = 0.0;
  FdrPhase phase = FdrPhase::I;
};

/// Leading constant of q_ideal: 0 (r > vartheta), (vartheta - r)/(2r)
/// (vartheta/3 < r < vartheta), 1 (rho_theta < r < vartheta/3). On r = vartheta
/// or r = vartheta/3 the phase is `boundary` with the middle formula's value.
IdealFdr ideal_fdr(double vartheta, double r, double theta);

struct PhasePoint {
  double vartheta = 0.5;
  double r = 0.0;
  double theta = 0.0;
};

enum class RegionLabel { undetectable, detectable, failure, success_I, success_II, success_III, boundary };
enum class PhaseMode { detection, classification };
enum class SidePreference { none, below, above };

std::string_view to_string(RegionLabel label);

/// Points within kBoundaryTolerance of a boundary get `boundary` unless a side
/// preference resolves them.
RegionLabel classify_region(const PhasePoint& point, PhaseMode mode, SidePreference side = SidePreference::none);

struct PhaseRow {
  double vartheta = 0.0;
  double rho = 0.0;
  double rho_theta = 0.0;
  std::string_view qideal_phase;  // I, II, III, boundary or failure
  std::optional<double> qideal_value;
};

/// vartheta_k = (1 - theta) k / (grid + 1), k = 1..grid, strictly inside the
/// domain; the q_ideal columns are evaluated at strength `r`.
std::vector<PhaseRow> boundary_table(double theta, std::size_t grid, double r);

}  // namespace hicrit
