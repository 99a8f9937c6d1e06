#include "hsr/classifier.hpp"
#include "hsr/logit_io.hpp"
#include "hsr/patch.hpp"
#include "hsr/rng.hpp"
#include "hsr/synth.hpp"

#include <doctest.h>

#include "test_util.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

using namespace hsr;
using testutil::TempDir;

namespace {

HsiCube random_cube(int h, int w, int d, uint64_t seed) {
    HsiCube cube(h, w, d);
    Rng rng(seed);
    for (auto& v : cube.data) v = static_cast<float>(rng.real());
    return cube;
}

Patch random_patch(int S, int D, uint64_t seed) {
    const HsiCube cube = random_cube(S, S, D, seed);
    return extract_patch(cube, (S - 1) / 2, (S - 1) / 2, S);
}

std::vector<TrainingSample> random_batch(int n, int S, int D, int k, uint64_t seed) {
    std::vector<TrainingSample> batch;
    Rng rng(seed);
    for (int i = 0; i < n; ++i)
        batch.push_back({random_patch(S, D, rng.next_u64()),
                         static_cast<int>(rng.below(static_cast<uint64_t>(k)))});
    return batch;
}

} // namespace

TEST_CASE("cross entropy frozen oracles") {
    // Independently computed with 40-digit arithmetic.
    CHECK(cross_entropy_loss({1.0, 2.0, 3.0}, 2) ==
          doctest::Approx(0.4076059644443803).epsilon(1e-13));
    CHECK(cross_entropy_loss(std::vector<double>(10, 0.0), 4) ==
          doctest::Approx(2.302585092994046).epsilon(1e-13));
    CHECK(cross_entropy_loss({1000.0, 0.0}, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cross_entropy_loss({0.0, 1000.0}, 0) == doctest::Approx(1000.0).epsilon(1e-12));
}

TEST_CASE("cross entropy is shift invariant") {
    const std::vector<double> z = {0.3, -1.7, 2.2, 0.05};
    std::vector<double> shifted = z;
    for (auto& v : shifted) v += 137.25;
    for (int c = 0; c < 4; ++c)
        CHECK(cross_entropy_loss(z, c) ==
              doctest::Approx(cross_entropy_loss(shifted, c)).epsilon(1e-9));
}

TEST_CASE("cross entropy rejects bad inputs") {
    CHECK_THROWS_AS(cross_entropy_loss({}, 0), Error);
    CHECK_THROWS_AS(cross_entropy_loss({1.0, 2.0}, 2), Error);
    CHECK_THROWS_AS(cross_entropy_loss({1.0, 2.0}, -1), Error);
    CHECK_THROWS_AS(
        cross_entropy_loss({std::numeric_limits<double>::infinity(), 0.0}, 0), Error);
}

TEST_CASE("pool_patch is the per-band mean in patch order") {
    const Patch p = random_patch(3, 4, 61);
    const auto pooled = pool_patch(p);
    REQUIRE(pooled.size() == 4);
    for (int b = 0; b < 4; ++b) {
        double acc = 0.0;
        for (int py = 0; py < 3; ++py)
            for (int px = 0; px < 3; ++px) acc += p.at(py, px, b);
        CHECK(pooled[b] == acc * (1.0 / 9.0)); // bitwise: same order, same ops
    }
    const Patch single = random_patch(1, 4, 62);
    const auto one = pool_patch(single);
    for (int b = 0; b < 4; ++b) CHECK(one[b] == doctest::Approx(single.at(0, 0, b)));
}

TEST_CASE("make_model sizes and bounds") {
    const ClassifierModel m = make_model(5, 8, 3, ArchConfig{}, 1);
    CHECK(m.params.size() == 8u * 64 + 64 + 64u * 3 + 3);
    const auto shapes = m.layer_shapes();
    REQUIRE(shapes.size() == 2);
    CHECK(shapes[0] == std::pair<int, int>{8, 64});
    CHECK(shapes[1] == std::pair<int, int>{64, 3});
    const double s0 = 1.0 / std::sqrt(8.0), s1 = 1.0 / std::sqrt(64.0);
    for (size_t i = 0; i < 8u * 64 + 64; ++i) CHECK(std::abs(m.params[i]) <= s0);
    for (size_t i = 8u * 64 + 64; i < m.params.size(); ++i)
        CHECK(std::abs(m.params[i]) <= s1);

    const ClassifierModel m2 = make_model(5, 8, 3, ArchConfig{}, 1);
    CHECK(m.params == m2.params);
    const ClassifierModel m3 = make_model(5, 8, 3, ArchConfig{}, 2);
    CHECK(m.params != m3.params);
}

TEST_CASE("forward equals forward_pooled of pool_patch bitwise") {
    const ClassifierModel m = make_model(3, 6, 4, ArchConfig{}, 9);
    const Patch p = random_patch(3, 6, 71);
    const auto a = m.forward(p);
    const auto pooled = pool_patch(p);
    const auto b = m.forward_pooled(pooled.data());
    REQUIRE(a.size() == 4);
    CHECK(a == b);
}

TEST_CASE("model io round trip") {
    TempDir dir;
    ClassifierModel m = make_model(7, 12, 5, ArchConfig{}, 77);
    m.epochs_seen = 3;
    m.final_loss = 0.5;
    const std::string path = dir.file("model.hsm");
    save_model(m, path);
    const ClassifierModel back = load_model(path);
    CHECK(back.patch_size == 7);
    CHECK(back.bands == 12);
    CHECK(back.num_classes == 5);
    CHECK(back.arch.hidden == m.arch.hidden);
    CHECK(back.epochs_seen == 3);
    CHECK(back.final_loss == 0.5);
    CHECK(back.params == m.params);

    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.write("XXXX", 4);
    f.close();
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("not a model file"),
                         Error);
}

TEST_CASE("gradient check stays within 1e-5") {
    const ClassifierModel m = make_model(3, 6, 3, ArchConfig{}, 13);
    const auto batch = random_batch(5, 3, 6, 3, 14);
    CHECK(gradient_check(m, batch, 120, 0) <= 1e-5);
    CHECK(gradient_check(m, {batch[0]}, 40, 1) <= 1e-5); // batch of one
}

TEST_CASE("gradient check input validation") {
    ClassifierModel empty;
    CHECK_THROWS_WITH_AS(gradient_check(empty, {}, 10, 0),
                         doctest::Contains("no parameters"), Error);
    const ClassifierModel m = make_model(3, 6, 3, ArchConfig{}, 13);
    CHECK_THROWS_WITH_AS(gradient_check(m, {}, 10, 0), doctest::Contains("empty batch"),
                         Error);
}

TEST_CASE("sampling caps at the labeled pixel count without replacement") {
    const HsiCube cube = random_cube(10, 10, 4, 81);
    LabelMap coarse(10, 10, 3);
    int placed = 0;
    for (int r = 0; r < 10 && placed < 70; ++r)
        for (int c = 0; c < 10 && placed < 70; ++c) {
            coarse.at(r, c) = static_cast<uint8_t>(1 + (r + c) % 3);
            ++placed;
        }
    TrainConfig tc;
    tc.pixels_per_image = 100;
    tc.patch_size = 3;
    const auto samples = sample_training_cubes(cube, coarse, tc);
    CHECK(samples.size() == 70);
    std::set<std::pair<int, int>> coords;
    for (const auto& s : samples) {
        coords.insert({s.patch.center_row, s.patch.center_col});
        const uint8_t lab = coarse.at(s.patch.center_row, s.patch.center_col);
        CHECK(s.class_index == lab - 1);
    }
    CHECK(coords.size() == 70); // no pixel drawn twice

    tc.pixels_per_image = 50;
    const auto fifty = sample_training_cubes(cube, coarse, tc);
    CHECK(fifty.size() == 50);
}

TEST_CASE("sampling an all-background label fails") {
    const HsiCube cube = random_cube(4, 4, 2, 83);
    const LabelMap coarse(4, 4, 2);
    TrainConfig tc;
    tc.patch_size = 3;
    CHECK_THROWS_WITH_AS(sample_training_cubes(cube, coarse, tc),
                         doctest::Contains("zero non-background"), Error);
}

TEST_CASE("learning rate zero leaves only weight-decay shrinkage") {
    const HsiCube cube = random_cube(4, 4, 3, 85);
    LabelMap coarse(4, 4, 2);
    for (int i = 0; i < 16; ++i) coarse.data[i] = static_cast<uint8_t>(1 + i % 2);
    std::vector<std::pair<const HsiCube*, const LabelMap*>> frames = {{&cube, &coarse}};

    TrainConfig tc;
    tc.learning_rate = 0.0;
    tc.weight_decay = 0.125;
    tc.epochs = 1;
    tc.pixels_per_image = 16;
    tc.cube_batch = 16; // exactly one step
    tc.patch_size = 3;
    tc.seed = 4;

    const ClassifierModel init =
        make_model(3, 3, 2, ArchConfig{}, derive_seed(tc.seed, "init"));
    const TrainResult r = train_frames(frames, 2, tc, 1);
    REQUIRE(r.model.params.size() == init.params.size());
    for (size_t i = 0; i < init.params.size(); ++i)
        CHECK(r.model.params[i] == (1.0 - 0.125) * init.params[i]);

    TrainConfig frozen = tc;
    frozen.weight_decay = 0.0;
    const TrainResult f = train_frames(frames, 2, frozen, 1);
    CHECK(f.model.params == init.params);
}

TEST_CASE("training is deterministic and thread-count invariant") {
    SceneConfig cfg;
    cfg.height = 20;
    cfg.width = 20;
    cfg.num_classes = 3;
    cfg.bands = 6;
    cfg.region_scale = 7;
    cfg.noise_sigma = 0.05;
    cfg.seed = 41;
    const auto [cube, fine] = generate_scene(cfg);
    std::vector<std::pair<const HsiCube*, const LabelMap*>> frames = {{&cube, &fine}};

    TrainConfig tc;
    tc.epochs = 3;
    tc.pixels_per_image = 120;
    tc.cube_batch = 32;
    tc.patch_size = 3;
    tc.seed = 51;

    const TrainResult a = train_frames(frames, 3, tc, 1);
    const TrainResult b = train_frames(frames, 3, tc, 1);
    CHECK(a.model.params == b.model.params);
    CHECK(a.epoch_mean_loss == b.epoch_mean_loss);

    const TrainResult c = train_frames(frames, 3, tc, 4);
    CHECK(a.model.params == c.model.params);
    CHECK(a.epoch_mean_loss == c.epoch_mean_loss);
}

// Patch size 1 keeps every sample pure: wider windows pool spectra across
// region boundaries, which caps the reachable loss no matter how long the
// model trains.
TEST_CASE("noise-free scene trains to near-zero loss and matching argmax") {
    SceneConfig cfg;
    cfg.height = 32;
    cfg.width = 32;
    cfg.num_classes = 3;
    cfg.bands = 16;
    cfg.region_scale = 16;
    cfg.noise_sigma = 0.0;
    cfg.seed = 43;
    const auto [cube, fine] = generate_scene(cfg);
    std::vector<std::pair<const HsiCube*, const LabelMap*>> frames = {{&cube, &fine}};

    TrainConfig tc;
    tc.epochs = 150;
    tc.learning_rate = 0.2;
    tc.weight_decay = 0.0;
    tc.pixels_per_image = 400;
    tc.cube_batch = 64;
    tc.patch_size = 1;
    tc.seed = 53;
    const TrainResult r = train_frames(frames, 3, tc, 1);
    CHECK(r.epoch_mean_loss.back() < 0.01);
    CHECK(r.epoch_mean_loss.back() < r.epoch_mean_loss.front());

    const LogitMap zmap = predict_map(r.model, cube, 1);
    size_t agree = 0;
    for (int row = 0; row < 32; ++row)
        for (int col = 0; col < 32; ++col) {
            const float* z = zmap.logits(row, col);
            int best = 0;
            for (int j = 1; j < 3; ++j)
                if (z[j] > z[best]) best = j;
            agree += (best + 1) == fine.at(row, col);
        }
    CHECK(static_cast<double>(agree) / (32.0 * 32.0) >= 0.99);
}

TEST_CASE("absurd learning rate raises the divergence error") {
    const HsiCube cube = random_cube(6, 6, 4, 87);
    LabelMap coarse(6, 6, 2);
    for (size_t i = 0; i < coarse.data.size(); ++i)
        coarse.data[i] = static_cast<uint8_t>(1 + i % 2);
    std::vector<std::pair<const HsiCube*, const LabelMap*>> frames = {{&cube, &coarse}};
    TrainConfig tc;
    tc.learning_rate = 1e308;
    tc.epochs = 4;
    tc.pixels_per_image = 36;
    tc.cube_batch = 8;
    tc.patch_size = 3;
    tc.seed = 5;
    CHECK_THROWS_WITH_AS(train_frames(frames, 2, tc, 1), doctest::Contains("diverged"),
                         Error);
}

TEST_CASE("train config validation") {
    TrainConfig tc;
    tc.learning_rate = -0.1;
    CHECK_THROWS_AS(tc.validate(), Error);
    tc = TrainConfig{};
    tc.weight_decay = 1.0;
    CHECK_THROWS_AS(tc.validate(), Error);
    tc = TrainConfig{};
    tc.patch_size = 4;
    CHECK_THROWS_AS(tc.validate(), Error);
    tc = TrainConfig{};
    tc.epochs = 0;
    CHECK_THROWS_AS(tc.validate(), Error);
    CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("predict_map with a zeroed top layer emits zero logits") {
    ClassifierModel m = make_model(3, 4, 3, ArchConfig{}, 91);
    const auto shapes = m.layer_shapes();
    size_t off = 0;
    for (size_t l = 0; l + 1 < shapes.size(); ++l)
        off += static_cast<size_t>(shapes[l].first) * shapes[l].second +
               shapes[l].second;
    for (size_t i = off; i < m.params.size(); ++i) m.params[i] = 0.0;

    const HsiCube cube = random_cube(5, 4, 4, 93);
    const LogitMap zmap = predict_map(m, cube, 1);
    for (float v : zmap.data) CHECK(v == 0.0f);
}

TEST_CASE("predict_map equals the patch path bitwise") {
    const ClassifierModel m = make_model(3, 5, 4, ArchConfig{}, 95);
    const HsiCube cube = random_cube(6, 7, 5, 97);
    const LogitMap zmap = predict_map(m, cube, 2);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 7; ++c) {
            const auto logits = m.forward(extract_patch(cube, r, c, 3));
            const float* z = zmap.logits(r, c);
            for (int j = 0; j < 4; ++j)
                CHECK(z[j] == static_cast<float>(logits[j]));
        }
}

TEST_CASE("logit map io round trip") {
    TempDir dir;
    LogitMap zmap(3, 4, 2);
    Rng rng(99);
    for (auto& v : zmap.data) v = static_cast<float>(rng.real(-5.0, 5.0));
    const std::string path = dir.file("z.hsz");
    save_logits(zmap, path);
    const LogitMap back = load_logits(path);
    CHECK(back.height == 3);
    CHECK(back.width == 4);
    CHECK(back.classes == 2);
    CHECK(back.data == zmap.data);

    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.write("ZZZZ", 4);
    f.close();
    CHECK_THROWS_AS(load_logits(path), Error);
}
