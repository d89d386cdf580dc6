#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qnet/dynamics.hpp"

namespace qnet {

enum class Effect { congestion_valley, staircase, asymptotic_unitarity };

const char* to_string(Effect effect);

/// Result of an effect detector. numbers and intervals are filled only when
/// detected; diagnostics always explains the decision.
struct EffectReport {
    Effect effect = Effect::congestion_valley;
    bool detected = false;
    std::map<std::string, double> numbers;
    /// Time intervals of the supporting segments (staircase steps).
    std::vector<std::pair<double, double>> intervals;
    std::string diagnostics;
};

struct FrequencyEstimate {
    double omega = 0.0;
    /// Standard error of the mean half-period, relative.
    double relative_uncertainty = 0.0;
    std::size_t extrema = 0;
};

/// Angular frequency of an oscillating signal from the mean spacing of its
/// extrema after removing a moving-average trend. Throws ValidationError when
/// fewer than three extrema remain.
FrequencyEstimate dominant_frequency(const std::vector<double>& times, const std::vector<double>& values);
FrequencyEstimate dominant_frequency(const Trajectory& trajectory, const std::string& site);

namespace thresholds {
/// Valley depth on both sides must exceed this.
inline constexpr double kCongestionNoiseFloor = 1e-6;
/// Minor/major increment ratio for a near-horizontal or near-vertical interval.
inline constexpr double kStaircaseSlopeRatio = 0.10;
/// Fraction of a run's major increment carried by its flat intervals.
inline constexpr double kStaircaseCoreFraction = 0.25;
/// Intervals slower than this fraction of the peak speed count as stationary.
inline constexpr double kStaircaseStationarySpeed = 1e-3;
inline constexpr int kStaircaseMinAlternations = 2;
/// Total decay factor of the distance required to call the dynamics asymptotically unitary.
inline constexpr double kUnitarityDecayFactor = 1e-2;
}  // namespace thresholds

/// values[i] is the observable at parameter[i]; parameters strictly ascending, >= 5 points.
EffectReport detect_congestion_valley(const std::vector<double>& parameters, const std::vector<double>& values);

/// Parametric curve (x(t), y(t)) of injection- and extraction-site populations.
EffectReport staircase_steps(const std::vector<double>& times, const std::vector<double>& x,
                             const std::vector<double>& y);

/// Decay of the unitarity distance plus, optionally, the modulus of a tracked
/// eigenbasis coherence (radius of the late-time circle).
EffectReport detect_asymptotic_unitarity(const std::vector<double>& times, const std::vector<double>& distance,
                                         const std::vector<double>& coherence_modulus = {});

}  // namespace qnet
