#pragma once

#include "cfgm/graphs.hpp"

namespace cfgm {

/// Confusion counts over the p(p-1)/2 unordered node pairs.
struct ConfusionCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

ConfusionCounts confusion(const EdgeSet& estimated, const EdgeSet& truth, int p);

/// Precision, TPR, FPR and F1 from confusion counts. 0/0 conventions:
/// an empty estimate against an empty truth scores 1 everywhere (perfect),
/// an empty estimate against a nonempty truth scores precision 0.
struct EdgeScores {
  double precision = 0.0, tpr = 0.0, fpr = 0.0, f1 = 0.0;
};

EdgeScores scores(const ConfusionCounts& c);

}  // namespace cfgm
