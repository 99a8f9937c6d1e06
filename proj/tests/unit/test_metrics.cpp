#include "hsr/metrics.hpp"
#include "hsr/rng.hpp"
#include "hsr/spectral.hpp"
#include "hsr/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

using namespace hsr;

namespace {

LabelMap make_label(int h, int w, int k, std::vector<uint8_t> data) {
    LabelMap m;
    m.height = h;
    m.width = w;
    m.num_classes = k;
    m.data = std::move(data);
    return m;
}

// Independent tally straight from the definition: sets of pixel indices per
// class, intersection over union, background-reference pixels ignored.
struct BruteReport {
    std::vector<double> iou;
    std::vector<bool> present;
    double miou = 0.0;
    double acc = 0.0;
};

BruteReport brute_evaluate(const LabelMap& pred, const LabelMap& ref) {
    const int k = ref.num_classes;
    BruteReport rep;
    rep.iou.assign(k, 0.0);
    rep.present.assign(k, false);
    uint64_t correct = 0, total = 0;
    double iou_sum = 0.0;
    int present = 0;
    for (int c = 1; c <= k; ++c) {
        uint64_t inter = 0, uni = 0, ref_count = 0;
        for (size_t i = 0; i < ref.data.size(); ++i) {
            if (ref.data[i] == 0) continue;
            const bool in_ref = ref.data[i] == c;
            const bool in_pred = pred.data[i] == c;
            if (in_ref) ++ref_count;
            if (in_ref && in_pred) ++inter;
            if (in_ref || in_pred) ++uni;
        }
        if (ref_count == 0) continue;
        rep.present[c - 1] = true;
        rep.iou[c - 1] = static_cast<double>(inter) / static_cast<double>(uni);
        iou_sum += rep.iou[c - 1];
        ++present;
    }
    for (size_t i = 0; i < ref.data.size(); ++i) {
        if (ref.data[i] == 0) continue;
        ++total;
        if (pred.data[i] == ref.data[i]) ++correct;
    }
    rep.miou = present > 0 ? iou_sum / present : 0.0;
    rep.acc = total > 0 ? static_cast<double>(correct) / static_cast<double>(total)
                        : 0.0;
    return rep;
}

} // namespace

TEST_CASE("a perfect prediction scores 1.0 everywhere") {
    LabelMap ref = make_label(2, 3, 3, {1, 1, 2, 2, 3, 3});
    const EvalReport rep = evaluate(ref, ref);
    CHECK(rep.miou == 1.0);
    CHECK(rep.pixel_acc == 1.0);
    CHECK(rep.at(1, 1) == 2);
    CHECK(rep.at(2, 2) == 2);
    CHECK(rep.at(3, 3) == 2);
    CHECK(rep.at(1, 2) == 0);
    CHECK(rep.at(2, 1) == 0);
    for (int c = 0; c < 3; ++c) {
        CHECK(rep.class_present[c]);
        CHECK(rep.per_class_iou[c] == 1.0);
        CHECK(rep.background_pred[c] == 0);
    }
}

TEST_CASE("hand-traced 2x2 confusion") {
    LabelMap ref = make_label(2, 2, 2, {1, 1, 2, 2});
    LabelMap pred = make_label(2, 2, 2, {1, 2, 2, 2});
    const EvalReport rep = evaluate(pred, ref);
    CHECK(rep.at(1, 1) == 1);
    CHECK(rep.at(2, 1) == 1);
    CHECK(rep.at(2, 2) == 2);
    CHECK(rep.at(1, 2) == 0);
    CHECK(rep.per_class_iou[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rep.per_class_iou[1] == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(rep.miou == doctest::Approx(7.0 / 12).epsilon(1e-15));
    CHECK(rep.pixel_acc == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("background reference pixels never enter the tallies") {
    LabelMap ref = make_label(2, 2, 2, {0, 0, 1, 1});
    LabelMap pred = make_label(2, 2, 2, {2, 2, 1, 1});
    const EvalReport rep = evaluate(pred, ref);
    CHECK(rep.at(1, 1) == 2);
    CHECK(rep.at(2, 1) == 0);
    CHECK(rep.at(2, 2) == 0);
    CHECK(rep.background_pred[0] == 0);
    CHECK(rep.background_pred[1] == 0);
    CHECK(rep.per_class_iou[0] == 1.0);
    CHECK(rep.miou == 1.0);
    CHECK(rep.pixel_acc == 1.0);
    CHECK_FALSE(rep.class_present[1]);
}

TEST_CASE("background predictions are false negatives") {
    LabelMap ref = make_label(1, 2, 1, {1, 1});
    LabelMap pred = make_label(1, 2, 1, {1, 0});
    const EvalReport rep = evaluate(pred, ref);
    CHECK(rep.background_pred[0] == 1);
    CHECK(rep.at(1, 1) == 1);
    CHECK(rep.per_class_iou[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rep.pixel_acc == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("absent classes are skipped by the mean and flagged in reports") {
    LabelMap ref = make_label(2, 2, 3, {1, 1, 2, 2});
    LabelMap pred = make_label(2, 2, 3, {1, 1, 1, 2});
    const EvalReport rep = evaluate(pred, ref);
    CHECK(rep.class_present[0]);
    CHECK(rep.class_present[1]);
    CHECK_FALSE(rep.class_present[2]);
    // class 1: tp 2, fp 1 -> 2/3; class 2: tp 1, fn 1 -> 1/2.
    CHECK(rep.miou == doctest::Approx((2.0 / 3 + 0.5) / 2).epsilon(1e-15));

    const std::string js = report_json(rep);
    CHECK(js.find("null") != std::string::npos);
    const std::string txt = report_text(rep);
    CHECK(txt.find("absent") != std::string::npos);
    CHECK(txt.find("class 3") != std::string::npos);

    Palette pal = make_default_palette(3);
    const std::string named = report_text(rep, &pal);
    CHECK(named.find(pal.name_of(1)) != std::string::npos);
}

TEST_CASE("evaluate matches a brute-force tally on random pairs") {
    Rng rng(0x5eedu);
    for (int it = 0; it < 30; ++it) {
        const int k = 1 + static_cast<int>(rng.below(5));
        LabelMap ref = make_label(16, 16, k, std::vector<uint8_t>(256, 0));
        LabelMap pred = make_label(16, 16, k, std::vector<uint8_t>(256, 0));
        for (size_t i = 0; i < ref.data.size(); ++i) {
            ref.data[i] = static_cast<uint8_t>(rng.below(k + 1));
            pred.data[i] = static_cast<uint8_t>(rng.below(k + 1));
        }
        const EvalReport rep = evaluate(pred, ref);
        const BruteReport brute = brute_evaluate(pred, ref);
        CHECK(rep.miou == doctest::Approx(brute.miou).epsilon(1e-12));
        CHECK(rep.pixel_acc == doctest::Approx(brute.acc).epsilon(1e-12));
        for (int c = 0; c < k; ++c) {
            CHECK(rep.class_present[c] == brute.present[c]);
            if (brute.present[c])
                CHECK(rep.per_class_iou[c] ==
                      doctest::Approx(brute.iou[c]).epsilon(1e-12));
        }
        uint64_t tallied = 0;
        for (uint64_t v : rep.confusion) tallied += v;
        for (uint64_t v : rep.background_pred) tallied += v;
        CHECK(tallied == ref.count_nonbackground());
    }
}

TEST_CASE("IoU is symmetric when no background is involved") {
    Rng rng(0xabcdu);
    for (int it = 0; it < 10; ++it) {
        const int k = 2 + static_cast<int>(rng.below(3));
        LabelMap a = make_label(16, 16, k, std::vector<uint8_t>(256, 0));
        LabelMap b = make_label(16, 16, k, std::vector<uint8_t>(256, 0));
        for (size_t i = 0; i < a.data.size(); ++i) {
            a.data[i] = static_cast<uint8_t>(1 + rng.below(k));
            b.data[i] = static_cast<uint8_t>(1 + rng.below(k));
        }
        for (int c = 0; c < k; ++c) { // guarantee every class in both maps
            a.data[c] = static_cast<uint8_t>(c + 1);
            b.data[c] = static_cast<uint8_t>(c + 1);
        }
        const EvalReport ab = evaluate(a, b);
        const EvalReport ba = evaluate(b, a);
        for (int c = 0; c < k; ++c)
            CHECK(ab.per_class_iou[c] == ba.per_class_iou[c]);
        CHECK(ab.miou == ba.miou);
        CHECK(ab.pixel_acc == ba.pixel_acc);
    }
}

TEST_CASE("evaluate validates its inputs") {
    LabelMap a = make_label(2, 2, 2, {1, 1, 2, 2});
    LabelMap b = make_label(2, 3, 2, {1, 1, 2, 2, 1, 1});
    CHECK_THROWS_WITH_AS(evaluate(a, b), doctest::Contains("dimensions disagree"),
                         Error);
    LabelMap c = make_label(2, 2, 3, {1, 1, 2, 2});
    CHECK_THROWS_WITH_AS(evaluate(a, c), doctest::Contains("class counts disagree"),
                         Error);
    LabelMap bad = make_label(2, 2, 1, {1, 2, 1, 1});
    CHECK_THROWS_AS(evaluate(bad, bad), Error);
}

TEST_CASE("separability hand value and edge cases") {
    // class 1: {0},{2} (mean 1); class 2: {4},{6} (mean 5); global mean 3.
    // between = 2*4 + 2*4 = 16, within = 1+1+1+1 = 4 -> ratio 4.
    std::vector<std::vector<float>> s = {{0.0f}, {2.0f}, {4.0f}, {6.0f}};
    std::vector<int> cls = {1, 1, 2, 2};
    CHECK(separability(s, cls) == doctest::Approx(4.0).epsilon(1e-15));

    std::vector<std::vector<float>> same(4, std::vector<float>{0.5f, 0.25f});
    CHECK(separability(same, cls) == 0.0);

    std::vector<std::vector<float>> split = {
        {0.0f, 0.0f}, {0.0f, 0.0f}, {1.0f, 0.0f}, {1.0f, 0.0f}};
    CHECK(std::isinf(separability(split, cls)));
    CHECK(separability(split, cls) > 0.0);
}

TEST_CASE("separability is invariant under translation") {
    // Samples on the 1/8 grid so adding the (grid-valued) shift is exact in
    // float; only then does the test probe the function, not f32 rounding.
    Rng rng(42);
    std::vector<std::vector<float>> s;
    std::vector<int> cls;
    for (int c = 1; c <= 3; ++c)
        for (int i = 0; i < 20; ++i) {
            std::vector<float> v(5);
            for (auto& x : v)
                x = static_cast<float>(c) +
                    0.125f * static_cast<float>(static_cast<int>(rng.below(33)) - 16);
            s.push_back(std::move(v));
            cls.push_back(c);
        }
    const double base = separability(s, cls);
    CHECK(base > 0.0);
    CHECK(std::isfinite(base));
    for (float shift : {10.5f, -6.25f, 0.125f}) {
        auto shifted = s;
        for (auto& v : shifted)
            for (auto& x : v) x += shift;
        CHECK(separability(shifted, cls) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("separability validates its inputs") {
    std::vector<std::vector<float>> s = {{0.0f}, {1.0f}};
    CHECK_THROWS_WITH_AS(separability(s, {1}), doctest::Contains("length"), Error);
    CHECK_THROWS_WITH_AS(separability({}, {}), doctest::Contains("needs samples"),
                         Error);
    CHECK_THROWS_WITH_AS(separability(s, {1, 1}),
                         doctest::Contains("at least 2 classes"), Error);
    std::vector<std::vector<float>> three = {{0.0f}, {1.0f}, {2.0f}};
    CHECK_THROWS_WITH_AS(separability(three, {1, 1, 2}),
                         doctest::Contains("at least 2 samples per class"), Error);
    std::vector<std::vector<float>> ragged = {{0.0f}, {1.0f, 2.0f}};
    CHECK_THROWS_WITH_AS(separability(ragged, {1, 2}),
                         doctest::Contains("dimension"), Error);
}

// Restricted to one metamer pair, the partner class differs from the lead only
// by a fixed null-space offset: RGB projections coincide variant by variant, so
// the offset is visible to spectra and invisible to color. Across unrelated
// classes both spaces see the same visible structure and neither dominates.
TEST_CASE("metamer pairs separate in spectra but not in RGB") {
    SceneConfig sc;
    sc.height = 48;
    sc.width = 48;
    sc.num_classes = 4;
    sc.spectra_per_class = 3;
    sc.noise_sigma = 0.01;
    sc.region_scale = 8; // many regions per class, so variant mixtures balance
    sc.metamer_pairs = {{1, 2}, {3, 4}};
    sc.metamer_magnitude = 1.0;
    sc.seed = 7;
    auto [cube, fine] = generate_scene(sc);
    const SpectralResponse resp =
        default_rgb_response(cube.bands, cube.wavelength_start_nm,
                             cube.wavelength_step_nm);
    const RgbImage rgb = project_to_rgb(cube, resp);

    for (const auto& [a, b] : sc.metamer_pairs) {
        std::vector<std::vector<float>> spectra, colors;
        std::vector<int> cls;
        for (int r = 0; r < fine.height; ++r)
            for (int c = 0; c < fine.width; ++c) {
                const int label = fine.at(r, c);
                if (label != a && label != b) continue;
                const float* s = cube.spectrum(r, c);
                spectra.emplace_back(s, s + cube.bands);
                const size_t o = (static_cast<size_t>(r) * rgb.width + c) * 3;
                colors.push_back({rgb.data[o], rgb.data[o + 1], rgb.data[o + 2]});
                cls.push_back(label);
            }
        CAPTURE(a);
        const double sep_spectra = separability(spectra, cls);
        const double sep_rgb = separability(colors, cls);
        CHECK(sep_spectra > sep_rgb);
        CHECK(std::isfinite(sep_spectra));
        CHECK(sep_rgb > 0.0);
    }
}
