#include "voicesearch/matching/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "voicesearch/common/error.hpp"

namespace voicesearch::matching {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t class_index(MatchClass c) { return static_cast<std::size_t>(c); }

// Points sorted by distance with running per-class counts, so the number of
// points of each class at or below any threshold is a binary search away.
class CumulativeCounts {
 public:
  explicit CumulativeCounts(std::span<const LabeledDistance> data) : sorted_(data.begin(), data.end()) {
    std::sort(sorted_.begin(), sorted_.end(),
              [](const auto& a, const auto& b) { return a.distance < b.distance; });
    prefix_.resize(sorted_.size() + 1);
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      prefix_[i + 1] = prefix_[i];
      ++prefix_[i + 1][class_index(sorted_[i].truth)];
    }
  }

  // Per-class counts with distance <= t.
  const std::array<std::size_t, 3>& at_or_below(double t) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t,
                                     [](double v, const auto& p) { return v < p.distance; });
    return prefix_[static_cast<std::size_t>(it - sorted_.begin())];
  }

  const std::array<std::size_t, 3>& totals() const { return prefix_.back(); }
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<LabeledDistance> sorted_;
  std::vector<std::array<std::size_t, 3>> prefix_;
};

// Correct predictions of the split "positive <=> class in `positive` <=> d <= t".
std::size_t binary_correct(const CumulativeCounts& cc, double t, std::array<bool, 3> positive) {
  const auto& below = cc.at_or_below(t);
  const auto& all = cc.totals();
  std::size_t correct = 0;
  for (std::size_t c = 0; c < 3; ++c) correct += positive[c] ? below[c] : all[c] - below[c];
  return correct;
}

std::size_t joint_correct(const CumulativeCounts& cc, double tm, double tw) {
  const auto& below_m = cc.at_or_below(tm);
  const auto& below_w = cc.at_or_below(tw);
  const auto& all = cc.totals();
  return below_m[0] + (below_w[1] - below_m[1]) + (all[2] - below_w[2]);
}

double best_binary(const CumulativeCounts& cc, std::span<const double> candidates, std::array<bool, 3> positive) {
  double best_t = candidates.front();
  std::size_t best = 0;
  for (double t : candidates) {
    const std::size_t c = binary_correct(cc, t, positive);
    if (c > best) {
      best = c;
      best_t = t;
    }
  }
  return best_t;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::string format_threshold(double t) {
  if (std::isinf(t)) return t < 0 ? "-inf" : "inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  return buf;
}

}  // namespace

std::string_view to_string(MatchClass c) {
  switch (c) {
    case MatchClass::same_word_same_mood: return "same_word_same_mood";
    case MatchClass::same_word_different_mood: return "same_word_different_mood";
    case MatchClass::different_word: return "different_word";
  }
  return "unknown";
}

MatchClass match_class_from_string(std::string_view s) {
  for (auto c : {MatchClass::same_word_same_mood, MatchClass::same_word_different_mood, MatchClass::different_word}) {
    if (s == to_string(c)) return c;
  }
  throw Error(Errc::malformed_request, "unknown match class '" + std::string(s) + "'");
}

void Thresholds::validate() const {
  if (!(same_mood >= 0.0) || !(same_word >= 0.0)) {
    throw Error(Errc::invalid_thresholds, "thresholds must be non-negative");
  }
  if (same_mood > same_word) throw Error(Errc::invalid_thresholds, "need T_m <= T_w");
}

MatchClass classify(double distance, const Thresholds& t) {
  if (distance <= t.same_mood) return MatchClass::same_word_same_mood;
  if (distance <= t.same_word) return MatchClass::same_word_different_mood;
  return MatchClass::different_word;
}

Metrics metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw Error(Errc::degenerate_denominator, "no counts");
  Metrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fn > 0) m.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (c.tn + c.fp > 0) m.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return m;
}

ConfusionCounts confusion_at(std::span<const BinaryLabeledDistance> data, double threshold) {
  ConfusionCounts c;
  for (const auto& d : data) {
    const bool predicted = d.distance <= threshold;
    if (d.positive) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

double three_class_accuracy(std::span<const LabeledDistance> data, const Thresholds& t) {
  if (data.empty()) throw Error(Errc::degenerate_denominator, "no labeled distances");
  std::size_t correct = 0;
  for (const auto& d : data) correct += classify(d.distance, t) == d.truth ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<double> threshold_candidates(std::span<const LabeledDistance> data) {
  std::vector<double> d;
  d.reserve(data.size());
  for (const auto& p : data) d.push_back(p.distance);
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  std::vector<double> out{0.0};
  for (std::size_t i = 0; i + 1 < d.size(); ++i) out.push_back(0.5 * (d[i] + d[i + 1]));
  if (!d.empty()) out.push_back(d.back());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Thresholds learn_thresholds(std::span<const LabeledDistance> data) {
  std::array<bool, 3> present{};
  for (const auto& d : data) {
    if (!(d.distance >= 0.0) || !std::isfinite(d.distance)) {
      throw Error(Errc::malformed_request, "distances must be finite and non-negative");
    }
    present[class_index(d.truth)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw Error(Errc::insufficient_labels, "need labeled distances from at least two classes");
  }

  const CumulativeCounts cc(data);
  const auto candidates = threshold_candidates(data);
  Thresholds t;
  t.same_mood = best_binary(cc, candidates, {true, false, false});
  t.same_word = best_binary(cc, candidates, {true, true, false});
  if (t.same_mood <= t.same_word) return t;

  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = i; j < candidates.size(); ++j) {
      const std::size_t c = joint_correct(cc, candidates[i], candidates[j]);
      if (c > best) {
        best = c;
        t = {candidates[i], candidates[j]};
      }
    }
  }
  return t;
}

std::vector<SweepPoint> threshold_sweep(std::span<const BinaryLabeledDistance> data) {
  const auto positives = static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](const auto& d) { return d.positive; }));
  if (positives == 0 || positives == data.size()) {
    throw Error(Errc::insufficient_labels, "sweep needs at least one positive and one negative");
  }
  std::vector<double> d;
  for (const auto& p : data) d.push_back(p.distance);
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());

  std::vector<double> thresholds{-kInf};
  for (std::size_t i = 0; i + 1 < d.size(); ++i) thresholds.push_back(0.5 * (d[i] + d[i + 1]));
  thresholds.push_back(kInf);

  std::vector<SweepPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto m = metrics(confusion_at(data, t));
    out.push_back({t, *m.sensitivity, *m.specificity});
  }
  return out;
}

std::string sweep_csv(std::span<const SweepPoint> points) {
  std::string out = "threshold,sensitivity,specificity\n";
  char buf[64];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", p.sensitivity, p.specificity);
    out += format_threshold(p.threshold) + buf;
  }
  return out;
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::string out = "similarity_level,accuracy,sensitivity,specificity\n";
  for (const auto& r : rows) {
    out += r.similarity_level + "," + format_metric(r.values.accuracy) + "," +
           format_metric(r.values.sensitivity) + "," + format_metric(r.values.specificity) + "\n";
  }
  return out;
}

}  // namespace voicesearch::matching
