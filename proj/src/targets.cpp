#include "stft/targets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stft {

float iou(const BBox& a, const BBox& b) {
    const float ix0 = std::max(a.x0, b.x0);
    const float iy0 = std::max(a.y0, b.y0);
    const float ix1 = std::min(a.x1, b.x1);
    const float iy1 = std::min(a.y1, b.y1);
    const float iw = std::max(0.0f, ix1 - ix0);
    const float ih = std::max(0.0f, iy1 - iy0);
    const float inter = iw * ih;
    if (inter <= 0.0f) return 0.0f;
    const float uni = a.area() + b.area() - inter;
    return inter / uni;
}

StaticTargets encode_static_targets(const std::vector<BBox>& gts, const LevelGrid& grid,
                                    float size_lo, float size_hi) {
    for (const auto& g : gts)
        if (!g.valid()) throw std::invalid_argument("encode_static_targets: degenerate ground-truth box");
    StaticTargets out;
    out.labels = Tensor<float>({1, grid.h, grid.w});
    out.g = Tensor<float>({4, grid.h, grid.w});
    const int cells = grid.cells();
    for (int i = 0; i < grid.h; ++i)
        for (int j = 0; j < grid.w; ++j) {
            const float x = grid.point_x(j);
            const float y = grid.point_y(i);
            int best = -1;
            float best_area = 0.0f;
            for (std::size_t k = 0; k < gts.size(); ++k) {
                const auto d = boundary_distances(x, y, gts[k]);
                if (d[0] < 0 || d[1] < 0 || d[2] < 0 || d[3] < 0) continue;
                const float m = std::max(std::max(d[0], d[1]), std::max(d[2], d[3]));
                if (m <= size_lo || m > size_hi) continue;
                if (best < 0 || gts[k].area() < best_area) {
                    best = static_cast<int>(k);
                    best_area = gts[k].area();
                }
            }
            const int idx = i * grid.w + j;
            if (best >= 0) {
                const auto d = boundary_distances(x, y, gts[static_cast<std::size_t>(best)]);
                out.labels.data()[idx] = 1.0f;
                for (int c = 0; c < 4; ++c)
                    out.g.data()[c * cells + idx] = d[static_cast<std::size_t>(c)];
                ++out.n_pos;
            }
        }
    return out;
}

TemporalTargets assign_temporal(const std::vector<BBox>& decoded, const LevelGrid& grid,
                                const std::vector<BBox>& gts, float iou_thresh, float sigma) {
    if (static_cast<int>(decoded.size()) != grid.cells())
        throw std::invalid_argument("assign_temporal: decoded box count does not match grid");
    TemporalTargets out;
    out.labels = Tensor<float>({1, grid.h, grid.w});
    out.deltas = Tensor<float>({4, grid.h, grid.w});
    const int cells = grid.cells();
    for (int idx = 0; idx < cells; ++idx) {
        const BBox& pred = decoded[static_cast<std::size_t>(idx)];
        int best = -1;
        float best_iou = 0.0f;
        for (std::size_t k = 0; k < gts.size(); ++k) {
            const float v = iou(pred, gts[k]);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(k);
            }
        }
        if (best >= 0 && best_iou > iou_thresh) {  // strict gate; ties at the threshold stay negative
            out.labels.data()[idx] = 1.0f;
            const auto d = encode_delta(pred, gts[static_cast<std::size_t>(best)], sigma);
            for (int c = 0; c < 4; ++c) out.deltas.data()[c * cells + idx] = d[static_cast<std::size_t>(c)];
            ++out.n_pos;
        }
    }
    return out;
}

std::array<float, 4> encode_delta(const BBox& pred, const BBox& gt, float sigma) {
    const float w = pred.width(), h = pred.height();
    if (w <= 0.0f || h <= 0.0f) throw std::invalid_argument("encode_delta: zero-size predicted box");
    return {(gt.x0 - pred.x0) / (w * sigma), (gt.y0 - pred.y0) / (h * sigma),
            (gt.x1 - pred.x1) / (w * sigma), (gt.y1 - pred.y1) / (h * sigma)};
}

BBox decode_delta(const BBox& pred, const std::array<float, 4>& delta, float sigma) {
    const float w = pred.width(), h = pred.height();
    return {pred.x0 + delta[0] * w * sigma, pred.y0 + delta[1] * h * sigma,
            pred.x1 + delta[2] * w * sigma, pred.y1 + delta[3] * h * sigma};
}

}  // namespace stft
