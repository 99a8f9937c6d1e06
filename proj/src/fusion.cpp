#include "hsr/fusion.hpp"

#include "hsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsr {

void FusionConfig::validate(int num_classes) const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0,1]");
    if (max_kernel < 1 || max_kernel % 2 == 0)
        throw Error("max_kernel must be odd and positive");
    if (!kernel_sizes.empty() && static_cast<int>(kernel_sizes.size()) != num_classes)
        throw Error("kernel_sizes must list one size per class");
    for (int l : kernel_sizes) {
        if (l < 1 || l % 2 == 0) throw Error("kernel sizes must be odd and positive");
        if (l > max_kernel)
            throw Error("kernel size " + std::to_string(l) + " exceeds max_kernel " +
                        std::to_string(max_kernel));
    }
}

std::pair<int, double> softmax_confidence(const float* logits, int k) {
    if (k < 1) throw Error("empty logit vector");
    int best = 0;
    double mx = logits[0];
    for (int j = 0; j < k; ++j) {
        if (!std::isfinite(logits[j])) throw Error("non-finite logit");
        if (logits[j] > mx) {
            mx = logits[j];
            best = j;
        }
    }
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::exp(static_cast<double>(logits[j]) - mx);
    return {best + 1, 1.0 / sum};
}

std::pair<int, double> softmax_confidence(const std::vector<double>& logits) {
    if (logits.empty()) throw Error("empty logit vector");
    int best = 0;
    double mx = logits[0];
    for (size_t j = 0; j < logits.size(); ++j) {
        if (!std::isfinite(logits[j])) throw Error("non-finite logit");
        if (logits[j] > mx) {
            mx = logits[j];
            best = static_cast<int>(j);
        }
    }
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - mx);
    return {best + 1, 1.0 / sum};
}

LabelMap apply_noise_control(const LogitMap& zmap, double alpha) {
    zmap.validate();
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0,1]");
    LabelMap prior(zmap.height, zmap.width, zmap.classes);
    for (int r = 0; r < zmap.height; ++r)
        for (int c = 0; c < zmap.width; ++c) {
            const auto [cls, conf] = softmax_confidence(zmap.logits(r, c), zmap.classes);
            prior.at(r, c) = conf >= alpha ? static_cast<uint8_t>(cls) : 0;
        }
    return prior;
}

Mask erode_class(const Mask& mask, int l) {
    if (l < 1 || l % 2 == 0) throw Error("erosion kernel must be odd and positive");
    if (l == 1) return mask;
    const int H = mask.height, W = mask.width, h = (l - 1) / 2;

    // Separable min filter with zero padding: rows, then columns.
    Mask tmp(H, W);
    for (int r = 0; r < H; ++r) {
        if (r - h < 0 || r + h >= H) continue; // padding zeroes the whole row
        for (int c = 0; c < W; ++c) {
            uint8_t v = 1;
            for (int dr = -h; dr <= h; ++dr)
                if (mask.at(r + dr, c) == 0) {
                    v = 0;
                    break;
                }
            tmp.at(r, c) = v;
        }
    }
    Mask out(H, W);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            if (c - h < 0 || c + h >= W) continue;
            uint8_t v = 1;
            for (int dc = -h; dc <= h; ++dc)
                if (tmp.at(r, c + dc) == 0) {
                    v = 0;
                    break;
                }
            out.at(r, c) = v;
        }
    return out;
}

Mask build_mask(const LabelMap& coarse, const std::vector<int>& kernel_sizes) {
    coarse.validate();
    if (static_cast<int>(kernel_sizes.size()) != coarse.num_classes)
        throw Error("kernel_sizes must list one size per class");
    Mask out(coarse.height, coarse.width);
    Mask indicator(coarse.height, coarse.width);
    for (int cls = 1; cls <= coarse.num_classes; ++cls) {
        for (size_t i = 0; i < coarse.data.size(); ++i)
            indicator.data[i] = coarse.data[i] == cls ? 1 : 0;
        const Mask eroded = erode_class(indicator, kernel_sizes[cls - 1]);
        for (size_t i = 0; i < out.data.size(); ++i)
            out.data[i] = out.data[i] || eroded.data[i];
    }
    return out;
}

LabelMap fuse(const LabelMap& coarse, const LabelMap& prior, const Mask& mask) {
    coarse.validate();
    prior.validate();
    if (coarse.height != prior.height || coarse.width != prior.width ||
        coarse.height != mask.height || coarse.width != mask.width)
        throw Error("fuse inputs disagree in dimensions");
    if (coarse.num_classes != prior.num_classes)
        throw Error("fuse inputs disagree in class count");
    LabelMap refined(coarse.height, coarse.width, coarse.num_classes);
    for (size_t i = 0; i < refined.data.size(); ++i)
        refined.data[i] = mask.data[i] ? coarse.data[i] : prior.data[i];
    return refined;
}

KernelSearchResult search_kernel_sizes(const LabelMap& coarse, const LabelMap& prior,
                                       const LabelMap& reference, int n) {
    if (n < 1 || n % 2 == 0) throw Error("max kernel size must be odd and positive");
    if (coarse.height != reference.height || coarse.width != reference.width)
        throw Error("coarse and reference dimensions disagree");
    const int k = coarse.num_classes;

    KernelSearchResult res;
    for (int l = 1; l <= n; l += 2) res.tested_sizes.push_back(l);
    res.sizes.assign(static_cast<size_t>(k), 1);
    res.iou_table.assign(static_cast<size_t>(k),
                         std::vector<double>(res.tested_sizes.size(),
                                             std::numeric_limits<double>::quiet_NaN()));

    std::vector<bool> in_ref(static_cast<size_t>(k) + 1, false);
    for (uint8_t v : reference.data)
        if (v != 0) in_ref[v] = true;

    for (int cls = 1; cls <= k; ++cls) {
        if (!in_ref[cls]) {
            res.warnings.push_back("class " + std::to_string(cls) +
                                   " absent from reference; kernel size defaults to 1");
            continue;
        }
        double best = -1.0;
        int best_l = 1;
        for (size_t li = 0; li < res.tested_sizes.size(); ++li) {
            std::vector<int> sizes(static_cast<size_t>(k), 1);
            sizes[cls - 1] = res.tested_sizes[li];
            const Mask mask = build_mask(coarse, sizes);
            const LabelMap refined = fuse(coarse, prior, mask);
            const EvalReport rep = evaluate(refined, reference);
            const double iou = rep.per_class_iou[cls - 1];
            res.iou_table[cls - 1][li] = iou;
            if (iou > best) {
                best = iou;
                best_l = res.tested_sizes[li];
            }
        }
        res.sizes[cls - 1] = best_l;
    }
    return res;
}

} // namespace hsr
