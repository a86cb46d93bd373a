#include "mandera/metrics.hpp"

#include <stdexcept>

namespace mandera {

ConfusionCounts confusion_from_labels(std::span<const int> truth,
                                      std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("confusion_from_labels: size mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] && predicted[i]) ++c.tp;
    else if (!truth[i] && predicted[i]) ++c.fp;
    else if (truth[i] && !predicted[i]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

DetectionMetrics metrics(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0)
    throw std::invalid_argument("metrics: negative counts");
  DetectionMetrics m;
  long total = c.tp + c.fp + c.fn + c.tn;
  if (total == 0) throw std::invalid_argument("metrics: empty confusion counts");
  m.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
  m.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  m.accuracy = static_cast<double>(c.tp + c.tn) / total;
  m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
  return m;
}

}  // namespace mandera
