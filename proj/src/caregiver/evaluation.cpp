#include "voicesearch/caregiver/evaluation.hpp"

#include <openssl/sha.h>

#include "voicesearch/common/error.hpp"

namespace voicesearch::caregiver {

using matching::BinaryLabeledDistance;
using matching::ConfusionCounts;
using matching::LabeledDistance;
using matching::MatchClass;
using matching::Metrics;
using matching::MetricsRow;
using matching::Thresholds;

MatchClass true_class(const Label& x, const Label& y) {
  if (x.word != y.word) return MatchClass::different_word;
  return x.mood == y.mood ? MatchClass::same_word_same_mood : MatchClass::same_word_different_mood;
}

bool in_training_split(const std::string& a, const std::string& b) {
  const std::string key = a < b ? a + "|" + b : b + "|" + a;
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(key.data()), key.size(), digest);
  return (digest[0] & 1U) == 0;
}

namespace {

void tally(ConfusionCounts& c, bool truth, bool predicted) {
  if (truth && predicted) ++c.tp;
  else if (truth) ++c.fn;
  else if (predicted) ++c.fp;
  else ++c.tn;
}

MetricsRow row(const std::string& name, const ConfusionCounts& c) {
  return {name, c.total() == 0 ? Metrics{} : matching::metrics(c)};
}

std::vector<LabeledDistance> to_labeled(std::span<const LabeledPair* const> pairs) {
  std::vector<LabeledDistance> out;
  out.reserve(pairs.size());
  for (const auto* p : pairs) out.push_back({p->distance, true_class(p->label_a, p->label_b)});
  return out;
}

}  // namespace

std::vector<matching::SweepPoint> same_word_sweep(std::span<const LabeledPair> pairs) {
  std::vector<BinaryLabeledDistance> data;
  data.reserve(pairs.size());
  for (const auto& p : pairs) data.push_back({p.distance, p.label_a.word == p.label_b.word});
  return matching::threshold_sweep(data);
}

EvaluationReport evaluate_pairs(std::span<const LabeledPair> pairs, const std::optional<Thresholds>& thresholds) {
  if (pairs.empty()) throw Error(Errc::insufficient_labels, "need at least two labeled records");

  std::vector<const LabeledPair*> train;
  std::vector<const LabeledPair*> test;
  std::vector<const LabeledPair*> all;
  for (const auto& p : pairs) {
    all.push_back(&p);
    (in_training_split(p.a, p.b) ? train : test).push_back(&p);
  }

  EvaluationReport report;
  if (thresholds) {
    thresholds->validate();
    report.thresholds = *thresholds;
    test = all;
    train.clear();
  } else {
    report.thresholds_learned = true;
    try {
      report.thresholds = matching::learn_thresholds(to_labeled(train));
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_labels) throw;
      report.thresholds = matching::learn_thresholds(to_labeled(all));
      report.trained_on_all_pairs = true;
    }
    if (test.empty()) test = all;
  }
  report.train_pairs = train.size();
  report.test_pairs = test.size();

  const Thresholds& t = report.thresholds;
  ConfusionCounts same_mood, different_mood, background, same_word;
  for (const auto* p : test) {
    const MatchClass truth = true_class(p->label_a, p->label_b);
    const MatchClass predicted = matching::classify(p->distance, t);
    tally(same_mood, truth == MatchClass::same_word_same_mood, predicted == MatchClass::same_word_same_mood);
    tally(different_mood, truth == MatchClass::same_word_different_mood,
          predicted == MatchClass::same_word_different_mood);
    tally(same_word, truth != MatchClass::different_word, p->distance <= t.same_word);
    if (truth != MatchClass::different_word) {
      tally(background, p->label_a.background == p->label_b.background, p->distance <= t.same_mood);
    }
  }
  report.rows = {row("same_mood", same_mood), row("different_mood", different_mood),
                 row("different_background", background), row("same_word", same_word)};
  report.three_class_accuracy = matching::three_class_accuracy(to_labeled(test), t);
  try {
    report.sweep = same_word_sweep(pairs);
  } catch (const Error& e) {
    if (e.code() != Errc::insufficient_labels) throw;
  }
  return report;
}

}  // namespace voicesearch::caregiver
