#include "stft/postprocess.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "stft/error.hpp"

namespace stft {

std::vector<BBox> fuse_boxes(const std::vector<BBox>& static_boxes, const Tensor<float>& deltas,
                             float sigma) {
    const std::int64_t cells = deltas.numel() / 4;
    if (deltas.rank() < 1 || deltas.dim(0) != 4 ||
        cells != static_cast<std::int64_t>(static_boxes.size()))
        throw ShapeError("fuse_boxes: delta field does not match box grid");
    std::vector<BBox> out(static_boxes.size());
    const float* d = deltas.data();
    for (std::int64_t i = 0; i < cells; ++i)
        out[static_cast<std::size_t>(i)] =
            decode_delta(static_boxes[static_cast<std::size_t>(i)],
                         {d[0 * cells + i], d[1 * cells + i], d[2 * cells + i], d[3 * cells + i]}, sigma);
    return out;
}

std::vector<Detection> nms(std::vector<Detection> dets, float iou_thresh, float score_thresh,
                           int max_dets) {
    std::erase_if(dets, [&](const Detection& d) { return d.score < score_thresh; });
    std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.box.x0 != b.box.x0) return a.box.x0 < b.box.x0;
        return a.box.y0 < b.box.y0;
    });
    std::vector<Detection> kept;
    for (const auto& d : dets) {
        bool suppressed = false;
        for (const auto& k : kept)
            if (iou(d.box, k.box) > iou_thresh) {
                suppressed = true;
                break;
            }
        if (!suppressed) {
            kept.push_back(d);
            if (static_cast<int>(kept.size()) >= max_dets) break;
        }
    }
    return kept;
}

void save_detections_jsonl(const std::filesystem::path& path,
                           const std::vector<std::vector<Detection>>& per_frame) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write detections to " + path.string());
    for (const auto& frame : per_frame)
        for (const auto& d : frame) {
            nlohmann::json j{{"frame", d.frame_index}, {"x0", d.box.x0}, {"y0", d.box.y0},
                             {"x1", d.box.x1},         {"y1", d.box.y1}, {"score", d.score}};
            out << j.dump() << "\n";
        }
}

std::vector<std::vector<Detection>> load_detections_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read detections from " + path.string());
    std::vector<std::vector<Detection>> frames;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw IoError("malformed JSON line in " + path.string());
        Detection d;
        d.frame_index = j.at("frame").get<int>();
        d.box = {j.at("x0").get<float>(), j.at("y0").get<float>(), j.at("x1").get<float>(),
                 j.at("y1").get<float>()};
        d.score = j.at("score").get<float>();
        if (d.frame_index >= static_cast<int>(frames.size()))
            frames.resize(static_cast<std::size_t>(d.frame_index) + 1);
        frames[static_cast<std::size_t>(d.frame_index)].push_back(d);
    }
    return frames;
}

}  // namespace stft
