#pragma once

#include <string>
#include <vector>

#include "stft/postprocess.hpp"

namespace stft {

struct EvalReport {
    std::string task;  // "detection" or "localization"
    int tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;  // percentages
};

// Percentages from raw counts; zero denominators give zero metrics.
EvalReport make_report(const std::string& task, int tp, int fp, int fn);

// Frame-level task: a polyp frame with any prediction above threshold is one
// TP, with none an FN; a polyp-free frame with any prediction is one FP.
EvalReport evaluate_detection(const std::vector<std::vector<Detection>>& preds,
                              const std::vector<std::vector<BBox>>& gts, float score_thresh);

enum class LocCriterion { centroid, iou50 };

// Box-level task: predictions (high score first) match at most one unmatched
// ground truth; the default criterion is prediction centroid inside the box.
EvalReport evaluate_localization(const std::vector<std::vector<Detection>>& preds,
                                 const std::vector<std::vector<BBox>>& gts, float score_thresh,
                                 LocCriterion criterion = LocCriterion::centroid);

}  // namespace stft
