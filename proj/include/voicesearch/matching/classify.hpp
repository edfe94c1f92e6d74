#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace voicesearch::matching {

enum class MatchClass {
  same_word_same_mood,
  same_word_different_mood,
  different_word,
};

std::string_view to_string(MatchClass c);
// Throws Error(malformed_request) for unknown names.
MatchClass match_class_from_string(std::string_view s);

// T_m (same_mood) <= T_w (same_word).
struct Thresholds {
  double same_mood = 0.0;
  double same_word = 0.0;

  // Throws Error(invalid_thresholds).
  void validate() const;

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

// d <= T_m -> same word same mood; T_m < d <= T_w -> same word, different
// mood; d > T_w -> different word.
MatchClass classify(double distance, const Thresholds& t);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// A metric whose denominator is zero is left empty rather than reported as 0.
struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

// Throws Error(degenerate_denominator) when there are no counts at all.
Metrics metrics(const ConfusionCounts& c);

struct LabeledDistance {
  double distance;
  MatchClass truth;
};

struct BinaryLabeledDistance {
  double distance;
  bool positive;
};

// Binary confusion for the rule "positive <=> distance <= threshold".
ConfusionCounts confusion_at(std::span<const BinaryLabeledDistance> data, double threshold);

double three_class_accuracy(std::span<const LabeledDistance> data, const Thresholds& t);

// Candidate thresholds used by learn_thresholds: 0, the midpoints between
// consecutive distinct distances, and the largest distance.
std::vector<double> threshold_candidates(std::span<const LabeledDistance> data);

// T_m maximises accuracy of same-mood vs rest, T_w of same-word vs
// different-word, each over threshold_candidates (ties go to the smaller
// value). If that yields T_m > T_w, both are refit jointly for three-class
// accuracy. Throws Error(insufficient_labels) with fewer than two classes.
Thresholds learn_thresholds(std::span<const LabeledDistance> data);

struct SweepPoint {
  double threshold;
  double sensitivity;
  double specificity;
};

// Evaluated at -inf, every midpoint of consecutive distinct distances, and
// +inf. Throws Error(insufficient_labels) without at least one positive and
// one negative.
std::vector<SweepPoint> threshold_sweep(std::span<const BinaryLabeledDistance> data);

// Header threshold,sensitivity,specificity.
std::string sweep_csv(std::span<const SweepPoint> points);

struct MetricsRow {
  std::string similarity_level;
  Metrics values;
};

// Header similarity_level,accuracy,sensitivity,specificity; undefined
// metrics are written as NA.
std::string metrics_csv(std::span<const MetricsRow> rows);

}  // namespace voicesearch::matching
