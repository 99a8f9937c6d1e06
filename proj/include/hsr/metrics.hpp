#pragma once

#include "hsr/types.hpp"

#include <string>
#include <vector>

namespace hsr {

// Confusion counts are prediction x reference over pixels whose reference is
// non-background; background predictions land in background_pred per
// reference class (they are false negatives, never true positives).
struct EvalReport {
    int num_classes = 0;
    std::vector<uint64_t> confusion;       // confusion[(p-1)*k + (r-1)], p,r in 1..k
    std::vector<uint64_t> background_pred; // background_pred[r-1]
    std::vector<double> per_class_iou;     // meaningful only where class_present
    std::vector<bool> class_present;       // class appears in the reference
    double miou = 0.0;      // mean IoU over classes present in the reference
    double pixel_acc = 0.0; // correct / non-background-reference pixels

    uint64_t at(int pred, int ref) const {
        return confusion[static_cast<size_t>(pred - 1) * num_classes + (ref - 1)];
    }
};

EvalReport evaluate(const LabelMap& pred, const LabelMap& ref);

std::string report_json(const EvalReport& report);
// Aligned table: mIoU, Acc, then one column per class.
std::string report_text(const EvalReport& report, const Palette* palette = nullptr);

// Fisher discriminant ratio: trace(between-class scatter) / trace(within-class
// scatter). 0 when all samples coincide; +infinity when classes are distinct
// but internally collapsed.
double separability(const std::vector<std::vector<float>>& samples,
                    const std::vector<int>& classes);

} // namespace hsr
