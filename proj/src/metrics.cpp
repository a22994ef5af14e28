#include "stft/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace stft {

EvalReport make_report(const std::string& task, int tp, int fp, int fn) {
    EvalReport r;
    r.task = task;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.precision = tp + fp > 0 ? 100.0 * tp / (tp + fp) : 0.0;
    r.recall = tp + fn > 0 ? 100.0 * tp / (tp + fn) : 0.0;
    r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

EvalReport evaluate_detection(const std::vector<std::vector<Detection>>& preds,
                              const std::vector<std::vector<BBox>>& gts, float score_thresh) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("evaluate_detection: frame count mismatch");
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t f = 0; f < gts.size(); ++f) {
        bool has_pred = false;
        for (const auto& d : preds[f])
            if (d.score >= score_thresh) {
                has_pred = true;
                break;
            }
        if (!gts[f].empty()) {
            has_pred ? ++tp : ++fn;
        } else if (has_pred) {
            ++fp;  // at most one per polyp-free frame
        }
    }
    return make_report("detection", tp, fp, fn);
}

EvalReport evaluate_localization(const std::vector<std::vector<Detection>>& preds,
                                 const std::vector<std::vector<BBox>>& gts, float score_thresh,
                                 LocCriterion criterion) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("evaluate_localization: frame count mismatch");
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t f = 0; f < gts.size(); ++f) {
        std::vector<Detection> cand;
        for (const auto& d : preds[f])
            if (d.score >= score_thresh) cand.push_back(d);
        std::sort(cand.begin(), cand.end(), [](const Detection& a, const Detection& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.box.x0 != b.box.x0) return a.box.x0 < b.box.x0;
            return a.box.y0 < b.box.y0;
        });
        std::vector<bool> taken(gts[f].size(), false);
        for (const auto& d : cand) {
            int hit = -1;
            for (std::size_t k = 0; k < gts[f].size(); ++k) {
                if (taken[k]) continue;
                bool match = false;
                if (criterion == LocCriterion::centroid) {
                    const float cx = 0.5f * (d.box.x0 + d.box.x1);
                    const float cy = 0.5f * (d.box.y0 + d.box.y1);
                    match = cx >= gts[f][k].x0 && cx <= gts[f][k].x1 && cy >= gts[f][k].y0 &&
                            cy <= gts[f][k].y1;
                } else {
                    match = iou(d.box, gts[f][k]) >= 0.5f;
                }
                if (match) {
                    hit = static_cast<int>(k);
                    break;
                }
            }
            if (hit >= 0) {
                taken[static_cast<std::size_t>(hit)] = true;
                ++tp;
            } else {
                ++fp;
            }
        }
        for (bool t : taken)
            if (!t) ++fn;
    }
    return make_report("localization", tp, fp, fn);
}

}  // namespace stft
