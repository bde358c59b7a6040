#pragma once

#include <cstddef>

// Acceptance thresholds. Shared by the experiments (for --strict) and the
// acceptance binary.
namespace kinfp::criteria {

// group algebra
inline constexpr double kAssocRel = 1e-12;
inline constexpr double kInverseAbs = 1e-13;
inline constexpr double kDistTol = 1e-8;  // knorm / kdist tolerance
inline constexpr double kSymmetryTols = 2.0;
inline constexpr double kLeftInvTols = 2.0;
inline constexpr double kDilationTols = 4.0;
inline constexpr double kTriangleTols = 3.0;
inline constexpr double kGroupSeconds = 10.0;

// self-similar profile
inline constexpr double kOdeResidual = 1e-6;
inline constexpr double kLeftExponent = 0.5, kLeftExponentTol = 0.02;
inline constexpr double kRightRate = 1.0 / 9.0, kRightRateRel = 0.05;
inline constexpr double kProfileSeconds = 5.0;

// whole-space decay
inline constexpr double kDecaySlope = -2.0, kDecaySlopeTol = 0.15;
inline constexpr double kVariableSpread = 2.0;
inline constexpr double kWholeSpaceSeconds = 180.0;

// conservation of int f phi~
inline constexpr double kDriftReference = 0.02;
inline constexpr double kDriftRefined = 0.007;
inline constexpr double kHalfSpaceSeconds = 180.0;

// boundary profiles
inline constexpr double kXExponent = 1.0 / 6.0, kXExponentTol = 0.03;
inline constexpr double kMinDecades = 1.0;
inline constexpr double kVExponent = 0.5, kVExponentTol = 0.05;
inline constexpr double kRateRel = 0.15;
inline constexpr double kBoundarySeconds = 300.0;

// region lemmas
inline constexpr double kRegionRelTol = 1e-9;
inline constexpr double kPhiLowerConstant = 0.1;
inline constexpr double kRegionSeconds = 60.0;

// weight mu~
inline constexpr double kCBestSpread = 0.3;
inline constexpr double kWeightSeconds = 60.0;

// functional inequalities
inline constexpr double kConstantStability = 0.2;
inline constexpr double kInequalitySeconds = 300.0;

// Young
inline constexpr double kYoungSlack = 0.05;
inline constexpr double kYoungSeconds = 60.0;

// particles vs solver
inline constexpr double kSurvivalRel = 0.03;
inline constexpr double kCoarseL1 = 0.10;
inline constexpr double kParticleSeconds = 180.0;

// isolated region
inline constexpr double kRetention = 0.5;
inline constexpr double kUnderestimate = 10.0;
inline constexpr double kIsolatedSeconds = 300.0;

// fits
inline constexpr std::size_t kMinFitPoints = 8;

}  // namespace kinfp::criteria
