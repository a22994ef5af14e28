#pragma once

#include <array>
#include <vector>

#include "stft/tensor.hpp"

namespace stft {

struct BBox {
    float x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool valid() const { return x0 < x1 && y0 < y1; }
    float width() const { return x1 - x0; }
    float height() const { return y1 - y0; }
    float area() const { return width() * height(); }
};

// Intersection over union; 0 for disjoint boxes.
float iou(const BBox& a, const BBox& b);

// Feature-level grid; cell (i, j) sits at image point (stride*(j+0.5), stride*(i+0.5)).
struct LevelGrid {
    int h = 0, w = 0, stride = 1;
    float point_x(int j) const { return static_cast<float>(stride) * (static_cast<float>(j) + 0.5f); }
    float point_y(int i) const { return static_cast<float>(stride) * (static_cast<float>(i) + 0.5f); }
    int cells() const { return h * w; }
};

// Distances (l, t, r, b) from an image point to the four box boundaries.
inline std::array<float, 4> boundary_distances(float x, float y, const BBox& g) {
    return {x - g.x0, y - g.y0, g.x1 - x, g.y1 - y};
}

struct StaticTargets {
    Tensor<float> labels;  // [1,H,W], 1 where the location is a static positive
    Tensor<float> g;       // [4,H,W] boundary distances (l,t,r,b); meaningful where labels==1
    int n_pos = 0;
};

// Boundary-distance encoding. A location is positive when it falls inside a
// ground-truth box and max(l,t,r,b) lies in this level's (size_lo, size_hi]
// range; overlapping ground truths resolve to the smallest area.
StaticTargets encode_static_targets(const std::vector<BBox>& gts, const LevelGrid& grid,
                                    float size_lo, float size_hi);

struct TemporalTargets {
    Tensor<float> labels;  // [1,H,W]
    Tensor<float> deltas;  // [4,H,W] sigma-scaled corner offsets; meaningful where labels==1
    int n_pos = 0;
};

// IoU-gated assignment: a location is positive when its decoded static box
// overlaps some ground truth with IoU strictly above iou_thresh; the target
// offsets point at the best-overlap box.
TemporalTargets assign_temporal(const std::vector<BBox>& decoded, const LevelGrid& grid,
                                const std::vector<BBox>& gts, float iou_thresh = 0.3f,
                                float sigma = 0.5f);

// Corner offsets between a predicted box and its ground truth, scaled by the
// predicted box extent and sigma.
std::array<float, 4> encode_delta(const BBox& pred, const BBox& gt, float sigma = 0.5f);
BBox decode_delta(const BBox& pred, const std::array<float, 4>& delta, float sigma = 0.5f);

}  // namespace stft
