#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stft/rng.hpp"
#include "stft/targets.hpp"

using namespace stft;

namespace {

BBox rand_box(Rng& rng, float extent) {
    const float x0 = static_cast<float>(rng.uniform(0, extent - 2));
    const float y0 = static_cast<float>(rng.uniform(0, extent - 2));
    const float w = static_cast<float>(rng.uniform(1, extent - x0));
    const float h = static_cast<float>(rng.uniform(1, extent - y0));
    return {x0, y0, x0 + w, y0 + h};
}

}  // namespace

TEST_CASE("iou identities and hand value") {
    const BBox a{0, 0, 2, 2};
    CHECK(iou(a, a) == doctest::Approx(1.0));
    CHECK(iou(a, BBox{5, 5, 7, 7}) == 0.0f);
    CHECK(iou(a, BBox{1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("iou symmetry and nested monotonicity") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const BBox a = rand_box(rng, 40), b = rand_box(rng, 40);
        CHECK(iou(a, b) == doctest::Approx(iou(b, a)));
        const float v = iou(a, b);
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
    // shrinking one box nested in another shrinks the overlap
    const BBox outer{0, 0, 16, 16};
    float prev = 1.0f;
    for (float s = 8; s >= 2; s -= 2) {
        const float v = iou(outer, BBox{8 - s, 8 - s, 8 + s, 8 + s});
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("boundary_distances matches the worked example") {
    const BBox g{2, 3, 10, 11};
    const auto d = boundary_distances(5, 7, g);
    CHECK(d[0] == 3.0f);
    CHECK(d[1] == 4.0f);
    CHECK(d[2] == 5.0f);
    CHECK(d[3] == 4.0f);
    // corner point: boundary case with zeros, still non-negative
    const auto c = boundary_distances(2, 3, g);
    CHECK(c[0] == 0.0f);
    CHECK(c[1] == 0.0f);
    CHECK(c[2] == 8.0f);
    CHECK(c[3] == 8.0f);
    // outside point goes negative
    const auto o = boundary_distances(0, 0, g);
    CHECK(o[0] == -2.0f);
    CHECK(o[1] == -3.0f);
}

TEST_CASE("encode_static_targets grid values and boundary cases") {
    const BBox g{2, 3, 10, 11};
    LevelGrid grid{16, 16, 1};
    auto t = encode_static_targets({g}, grid, 0.0f, 1e9f);
    // cell (7,5) sits at image point (5.5, 7.5)
    const int cells = grid.cells();
    const int idx = 7 * 16 + 5;
    CHECK(t.labels.data()[idx] == 1.0f);
    CHECK(t.g.data()[0 * cells + idx] == doctest::Approx(3.5));
    CHECK(t.g.data()[1 * cells + idx] == doctest::Approx(4.5));
    CHECK(t.g.data()[2 * cells + idx] == doctest::Approx(4.5));
    CHECK(t.g.data()[3 * cells + idx] == doctest::Approx(3.5));
    // a point outside the box stays negative
    CHECK(t.labels.data()[0] == 0.0f);

    CHECK_THROWS_AS((void)encode_static_targets({BBox{5, 5, 5, 5}}, grid, 0, 1e9f),
                    std::invalid_argument);
}

TEST_CASE("encode_static_targets respects level size ranges and smallest-area tie-break") {
    LevelGrid grid{8, 8, 8};
    const BBox inner{24, 24, 40, 40};
    const BBox outer{20, 20, 44, 44};  // also in the level-0 band at the center
    const BBox large{0, 0, 64, 64};    // extents beyond 32 everywhere
    auto lvl0 = encode_static_targets({outer, inner, large}, grid, 0.0f, 32.0f);
    auto lvl1 = encode_static_targets({outer, inner, large}, grid, 32.0f, 1e9f);
    // cell (3,3) at point (28,28): inner and outer both qualify; smallest area wins
    const int cells = grid.cells();
    const int idx = 3 * 8 + 3;
    CHECK(lvl0.labels.data()[idx] == 1.0f);
    CHECK(lvl0.g.data()[0 * cells + idx] == doctest::Approx(28.0 - 24.0));
    // the large box only fits the level-1 band
    bool any_lvl1 = false;
    for (int i = 0; i < cells; ++i) any_lvl1 |= lvl1.labels.data()[i] == 1.0f;
    CHECK(any_lvl1);
    CHECK(lvl1.labels.data()[idx] == 1.0f);
    CHECK(lvl1.g.data()[0 * cells + idx] == doctest::Approx(28.0));
}

TEST_CASE("encode/decode delta worked example and identities") {
    const BBox pred{0, 0, 4, 4}, gt{1, 1, 5, 5};
    const auto d = encode_delta(pred, gt, 0.5f);
    CHECK(d[0] == doctest::Approx(0.5));
    CHECK(d[1] == doctest::Approx(0.5));
    CHECK(d[2] == doctest::Approx(0.5));
    CHECK(d[3] == doctest::Approx(0.5));

    const BBox back = decode_delta(pred, d, 0.5f);
    CHECK(back.x0 == doctest::Approx(1));
    CHECK(back.y1 == doctest::Approx(5));

    const auto zero = encode_delta(pred, pred, 0.5f);
    for (float v : zero) CHECK(v == 0.0f);
    const BBox same = decode_delta(pred, {0, 0, 0, 0}, 0.5f);
    CHECK(same.x0 == pred.x0);
    CHECK(same.x1 == pred.x1);

    CHECK_THROWS_AS((void)encode_delta(BBox{1, 1, 1, 3}, gt, 0.5f), std::invalid_argument);
}

TEST_CASE("delta round trip is the identity over 1000 random pairs") {
    Rng rng(101);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const BBox pred = rand_box(rng, 60), gt = rand_box(rng, 60);
        const BBox back = decode_delta(pred, encode_delta(pred, gt), 0.5f);
        worst = std::max({worst, std::fabs(double(back.x0 - gt.x0)), std::fabs(double(back.y0 - gt.y0)),
                          std::fabs(double(back.x1 - gt.x1)), std::fabs(double(back.y1 - gt.y1))});
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("assign_temporal trivial cases") {
    LevelGrid grid{4, 4, 8};
    const BBox g{4, 4, 20, 20};
    std::vector<BBox> perfect(static_cast<std::size_t>(grid.cells()), g);
    auto t = assign_temporal(perfect, grid, {g});
    CHECK(t.n_pos == grid.cells());
    for (int i = 0; i < t.deltas.numel(); ++i) CHECK(t.deltas.data()[i] == 0.0f);

    std::vector<BBox> disjoint(static_cast<std::size_t>(grid.cells()), BBox{100, 100, 110, 110});
    auto t2 = assign_temporal(disjoint, grid, {g});
    CHECK(t2.n_pos == 0);
}

TEST_CASE("assign_temporal matches a brute-force oracle on random instances") {
    Rng rng(103);
    for (int inst = 0; inst < 100; ++inst) {
        LevelGrid grid{8, 8, 4};
        std::vector<BBox> decoded;
        decoded.reserve(static_cast<std::size_t>(grid.cells()));
        for (int i = 0; i < grid.cells(); ++i) decoded.push_back(rand_box(rng, 32));
        std::vector<BBox> gts;
        const int ng = 1 + static_cast<int>(rng.uniform_int(3));
        for (int k = 0; k < ng; ++k) gts.push_back(rand_box(rng, 32));

        auto got = assign_temporal(decoded, grid, gts);

        // independent re-derivation, location by location
        int n_pos = 0;
        const int cells = grid.cells();
        for (int i = 0; i < cells; ++i) {
            float best = 0;
            int arg = -1;
            for (std::size_t k = 0; k < gts.size(); ++k) {
                const float v = iou(decoded[static_cast<std::size_t>(i)], gts[k]);
                if (v > best) {
                    best = v;
                    arg = static_cast<int>(k);
                }
            }
            const bool pos = best > 0.3f;
            CHECK(got.labels.data()[i] == (pos ? 1.0f : 0.0f));
            if (pos) {
                ++n_pos;
                const auto d =
                    encode_delta(decoded[static_cast<std::size_t>(i)], gts[static_cast<std::size_t>(arg)]);
                for (int c = 0; c < 4; ++c)
                    CHECK(got.deltas.data()[c * cells + i] == d[static_cast<std::size_t>(c)]);
            }
        }
        CHECK(got.n_pos == n_pos);
    }
}

TEST_CASE("assign_temporal IoU exactly at the threshold stays negative") {
    LevelGrid grid{1, 1, 8};
    // boxes arranged for IoU exactly 0.3: inter=3, union=10 (areas 6 and 7)
    const BBox pred{0, 0, 3, 2};   // area 6
    const BBox gt{0, 1, 3.5f, 3};  // area 7, inter = 3x1 = 3
    REQUIRE(iou(pred, gt) == doctest::Approx(0.3));
    auto t = assign_temporal({pred}, grid, {gt});
    CHECK(t.n_pos == 0);
}
