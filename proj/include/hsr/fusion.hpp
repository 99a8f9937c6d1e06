#pragma once

#include "hsr/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hsr {

struct FusionConfig {
    double alpha = 0.7;
    std::vector<int> kernel_sizes; // per class, odd; empty = all 1
    int max_kernel = 11;

    void validate(int num_classes) const;
};

// Argmax class (1-based label) and its softmax probability, max-shifted.
// Ties go to the lowest class index.
std::pair<int, double> softmax_confidence(const float* logits, int k);
std::pair<int, double> softmax_confidence(const std::vector<double>& logits);

// Hard prior: argmax class where confidence >= alpha, background below.
LabelMap apply_noise_control(const LogitMap& zmap, double alpha);

// l x l min filter, zero padded; l=1 is the identity.
Mask erode_class(const Mask& mask, int l);

// Union of per-class erosions of the coarse regions. Disjoint inputs keep the
// sum binary.
Mask build_mask(const LabelMap& coarse, const std::vector<int>& kernel_sizes);

// refined = coarse where mask=1, else prior.
LabelMap fuse(const LabelMap& coarse, const LabelMap& prior, const Mask& mask);

struct KernelSearchResult {
    std::vector<int> sizes;                    // selected l per class
    std::vector<std::vector<double>> iou_table; // [class-1][l/2] IoU, NaN = absent
    std::vector<int> tested_sizes;             // odd l values, shared per class
    std::vector<std::string> warnings;
};

// Per class independently: sweep odd l in 1..n with other classes held at 1,
// keep the l with the best refined IoU for that class. Ties take the smaller
// l; classes absent from the reference fall back to 1 with a warning.
KernelSearchResult search_kernel_sizes(const LabelMap& coarse, const LabelMap& prior,
                                       const LabelMap& reference, int n);

} // namespace hsr
