#include "cfgm/metrics.hpp"

#include <stdexcept>

namespace cfgm {

ConfusionCounts confusion(const EdgeSet& estimated, const EdgeSet& truth,
                          int p) {
  auto check = [p](const EdgeSet& set, const char* name) {
    for (const Edge& e : set.edges)
      if (e.u < 0 || e.v >= p || e.u >= e.v)
        throw std::invalid_argument(std::string("metrics: ") + name +
                                    " edge outside node range");
  };
  check(estimated, "estimated");
  check(truth, "truth");

  ConfusionCounts c;
  for (int u = 0; u < p; ++u)
    for (int v = u + 1; v < p; ++v) {
      const bool est = estimated.contains(u, v);
      const bool tru = truth.contains(u, v);
      if (est && tru) ++c.tp;
      else if (est && !tru) ++c.fp;
      else if (!est && tru) ++c.fn;
      else ++c.tn;
    }
  return c;
}

EdgeScores scores(const ConfusionCounts& c) {
  EdgeScores s;
  const long tp = c.tp, fp = c.fp, fn = c.fn, tn = c.tn;
  s.precision = (tp + fp) > 0 ? double(tp) / double(tp + fp)
                              : (fn == 0 ? 1.0 : 0.0);
  s.tpr = (tp + fn) > 0 ? double(tp) / double(tp + fn) : (fp == 0 ? 1.0 : 0.0);
  s.fpr = (fp + tn) > 0 ? double(fp) / double(fp + tn) : 0.0;
  s.f1 = (2 * tp + fp + fn) > 0 ? 2.0 * tp / double(2 * tp + fp + fn) : 1.0;
  return s;
}

}  // namespace cfgm
