#pragma once

#include <span>
#include <vector>

namespace mandera {

/// Malicious = positive class.
struct ConfusionCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

ConfusionCounts confusion_from_labels(std::span<const int> truth,
                                      std::span<const int> predicted);

struct DetectionMetrics {
  double precision = 0, recall = 0, accuracy = 0, f1 = 0;
};

/// Detection metrics with zero-denominator conventions: precision = 0 when
/// tp+fp = 0, recall = 0 when tp+fn = 0, f1 = 0 when precision+recall = 0.
DetectionMetrics metrics(const ConfusionCounts& c);

}  // namespace mandera
