#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voicesearch/caregiver/labels.hpp"
#include "voicesearch/matching/classify.hpp"

namespace voicesearch::caregiver {

// One unordered pair of labeled records with its decoded distance.
struct LabeledPair {
  std::string a;
  std::string b;
  double distance = 0.0;
  Label label_a;
  Label label_b;
};

matching::MatchClass true_class(const Label& x, const Label& y);

// Pairs go to the training half when the first byte of
// SHA-256(min_id + "|" + max_id) is even.
bool in_training_split(const std::string& a, const std::string& b);

struct EvaluationReport {
  matching::Thresholds thresholds;
  bool thresholds_learned = false;
  // True when the training half lacked two classes and thresholds were
  // learned from every pair instead.
  bool trained_on_all_pairs = false;
  std::size_t train_pairs = 0;
  std::size_t test_pairs = 0;
  double three_class_accuracy = 0.0;
  // Rows, in order: same_mood, different_mood, different_background,
  // same_word.
  std::vector<matching::MetricsRow> rows;
  // Same-word detection swept over every pair.
  std::vector<matching::SweepPoint> sweep;
};

// With explicit thresholds every pair is a test pair. Otherwise thresholds
// are learned on the training split and rows use the test split (or all
// pairs if the test split is empty). Throws Error(insufficient_labels) for
// fewer than one pair or when no two classes are present.
EvaluationReport evaluate_pairs(std::span<const LabeledPair> pairs,
                                const std::optional<matching::Thresholds>& thresholds = std::nullopt);

// Sweep for same-word detection; positive = same word label. Throws
// Error(insufficient_labels) unless both kinds of pair are present.
std::vector<matching::SweepPoint> same_word_sweep(std::span<const LabeledPair> pairs);

}  // namespace voicesearch::caregiver
