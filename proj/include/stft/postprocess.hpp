#pragma once

#include <filesystem>
#include <vector>

#include "stft/targets.hpp"

namespace stft {

struct Detection {
    BBox box;
    float score = 0.0f;
    int level = 0;
    int frame_index = 0;
};

// Final score is the product of the static score and the (squashed) offset.
inline float fuse_scores(float static_score, float score_offset) {
    return static_score * score_offset;
}

// Per-location warp of decoded static boxes by predicted corner offsets.
// `static_boxes` is row-major over the grid; `deltas` is a [4,H,W] field.
std::vector<BBox> fuse_boxes(const std::vector<BBox>& static_boxes, const Tensor<float>& deltas,
                             float sigma = 0.5f);

// Greedy descending-score suppression across all levels jointly; ties broken
// by (score desc, x0 asc, y0 asc) so the result is deterministic.
std::vector<Detection> nms(std::vector<Detection> dets, float iou_thresh = 0.6f,
                           float score_thresh = 0.05f, int max_dets = 100);

// JSON lines: {"frame":i,"x0":..,"y0":..,"x1":..,"y1":..,"score":..}
void save_detections_jsonl(const std::filesystem::path& path,
                           const std::vector<std::vector<Detection>>& per_frame);
std::vector<std::vector<Detection>> load_detections_jsonl(const std::filesystem::path& path);

}  // namespace stft
