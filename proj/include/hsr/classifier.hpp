#pragma once

#include "hsr/label_io.hpp"
#include "hsr/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hsr {

struct ArchConfig {
    std::vector<int> hidden = {64};
};

struct TrainConfig {
    double learning_rate = 0.01;
    double weight_decay = 0.0005;
    int epochs = 30;
    int pixels_per_image = 10000;
    int cube_batch = 256;
    int image_batch = 6;
    int patch_size = 11;
    uint64_t seed = 0;

    void validate() const;
};

// Patch classifier: per-band spatial mean pooling over the S x S window, then
// fully connected layers with tanh between them. Logits cover classes 1..k;
// background never gets a logit. Parameters are stored flat, layer by layer,
// weights (out x in, row-major) then biases.
struct ClassifierModel {
    int patch_size = 0;
    int bands = 0;
    int num_classes = 0;
    ArchConfig arch;
    std::vector<double> params;
    int epochs_seen = 0;
    double final_loss = 0.0;

    std::vector<std::pair<int, int>> layer_shapes() const; // (in, out) per layer
    size_t expected_param_count() const;
    void validate() const;

    // pooled must hold `bands` values: the per-band spatial mean of a patch.
    std::vector<double> forward_pooled(const double* pooled) const;
    std::vector<double> forward(const Patch& patch) const;
};

// Fresh model with uniform +/- 1/sqrt(fan_in) parameters.
ClassifierModel make_model(int patch_size, int bands, int num_classes,
                           const ArchConfig& arch, uint64_t seed);

void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);

// Per-band mean of the patch; the same summation order predict_map uses, so
// forward(patch) == forward_pooled(pool_patch(patch)) bitwise.
std::vector<double> pool_patch(const Patch& patch);

// L = -z[c] + log sum_k exp(z[k]), computed with the max-shift. c is a
// 0-based index into the logits.
double cross_entropy_loss(const std::vector<double>& logits, int c);

struct TrainingSample {
    Patch patch;
    int class_index = 0; // 0-based: coarse label minus 1
};

// Uniform sample (without replacement) of up to pixels_per_image
// non-background pixels, each paired with its mirror-padded patch.
std::vector<TrainingSample> sample_training_cubes(const HsiCube& cube,
                                                  const LabelMap& coarse,
                                                  const TrainConfig& config);

struct TrainResult {
    ClassifierModel model;
    std::vector<double> epoch_mean_loss;
};

// Two-level loop: per epoch, shuffle frames, walk them in groups of
// image_batch, pool the groups' sampled pixels into one pot, shuffle, then
// take SGD steps of cube_batch. Update per step, with decoupled weight decay:
// theta <- (1 - weight_decay) * theta - learning_rate * grad.
TrainResult train(const DatasetManifest& manifest, const TrainConfig& config,
                  int threads = 1);

// Same loop over already-loaded frames (cube, coarse) pairs.
TrainResult train_frames(const std::vector<std::pair<const HsiCube*, const LabelMap*>>& frames,
                         int num_classes, const TrainConfig& config, int threads = 1);

LogitMap predict_map(const ClassifierModel& model, const HsiCube& cube,
                     int threads = 1);

// Max relative error between analytic and central-difference gradients of the
// mean loss over the batch, probing up to `probes` parameters.
double gradient_check(const ClassifierModel& model,
                      const std::vector<TrainingSample>& batch,
                      int probes = 120, uint64_t seed = 0);

} // namespace hsr
