#include "hsr/metrics.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace hsr {

using nlohmann::json;

EvalReport evaluate(const LabelMap& pred, const LabelMap& ref) {
    pred.validate();
    ref.validate();
    if (pred.height != ref.height || pred.width != ref.width)
        throw Error("prediction and reference dimensions disagree");
    if (pred.num_classes != ref.num_classes)
        throw Error("prediction and reference class counts disagree");

    const int k = ref.num_classes;
    EvalReport rep;
    rep.num_classes = k;
    rep.confusion.assign(static_cast<size_t>(k) * k, 0);
    rep.background_pred.assign(static_cast<size_t>(k), 0);

    for (size_t i = 0; i < ref.data.size(); ++i) {
        const uint8_t r = ref.data[i];
        if (r == 0) continue;
        const uint8_t p = pred.data[i];
        if (p == 0)
            ++rep.background_pred[r - 1];
        else
            ++rep.confusion[static_cast<size_t>(p - 1) * k + (r - 1)];
    }

    rep.per_class_iou.assign(static_cast<size_t>(k), 0.0);
    rep.class_present.assign(static_cast<size_t>(k), false);
    uint64_t correct = 0, total = 0;
    double iou_sum = 0.0;
    int present = 0;
    for (int c = 1; c <= k; ++c) {
        uint64_t ref_count = rep.background_pred[c - 1];
        for (int p = 1; p <= k; ++p) ref_count += rep.at(p, c);
        total += ref_count;
        correct += rep.at(c, c);
        if (ref_count == 0) continue;
        rep.class_present[c - 1] = true;

        const uint64_t tp = rep.at(c, c);
        uint64_t fp = 0, fn = rep.background_pred[c - 1];
        for (int o = 1; o <= k; ++o) {
            if (o == c) continue;
            fp += rep.at(c, o);
            fn += rep.at(o, c);
        }
        rep.per_class_iou[c - 1] =
            static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
        iou_sum += rep.per_class_iou[c - 1];
        ++present;
    }
    rep.miou = present > 0 ? iou_sum / present : 0.0;
    rep.pixel_acc =
        total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    return rep;
}

std::string report_json(const EvalReport& report) {
    json per_class = json::array();
    for (int c = 0; c < report.num_classes; ++c) {
        if (report.class_present[c]) per_class.push_back(report.per_class_iou[c]);
        else per_class.push_back(nullptr);
    }
    json confusion = json::array();
    for (int p = 1; p <= report.num_classes; ++p) {
        json row = json::array();
        for (int r = 1; r <= report.num_classes; ++r) row.push_back(report.at(p, r));
        confusion.push_back(std::move(row));
    }
    const json j = {{"miou", report.miou},
                    {"pixel_acc", report.pixel_acc},
                    {"per_class_iou", std::move(per_class)},
                    {"confusion", std::move(confusion)},
                    {"background_pred", report.background_pred}};
    return j.dump(2) + "\n";
}

std::string report_text(const EvalReport& report, const Palette* palette) {
    std::string head = "| mIoU | Acc  |";
    std::string rule = "|------|------|";
    std::string vals;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "| %.3f | %.3f |", report.miou, report.pixel_acc);
    vals = buf;
    for (int c = 1; c <= report.num_classes; ++c) {
        std::string name =
            palette ? palette->name_of(c) : "class " + std::to_string(c);
        if (name.size() < 6) name.resize(6, ' ');
        head += " " + name + " |";
        rule += std::string(name.size() + 2, '-') + "|";
        if (report.class_present[c - 1])
            std::snprintf(buf, sizeof(buf), " %*.3f |",
                          static_cast<int>(name.size()), report.per_class_iou[c - 1]);
        else
            std::snprintf(buf, sizeof(buf), " %*s |",
                          static_cast<int>(name.size()), "absent");
        vals += buf;
    }
    return head + "\n" + rule + "\n" + vals + "\n";
}

double separability(const std::vector<std::vector<float>>& samples,
                    const std::vector<int>& classes) {
    if (samples.size() != classes.size())
        throw Error("samples and class labels disagree in length");
    if (samples.empty()) throw Error("separability needs samples");
    const size_t dim = samples.front().size();
    if (dim == 0) throw Error("separability needs non-empty feature vectors");

    std::map<int, std::pair<std::vector<double>, size_t>> per_class; // sum, count
    std::vector<double> global(dim, 0.0);
    for (size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != dim) throw Error("samples disagree in dimension");
        auto& [sum, count] = per_class[classes[i]];
        if (sum.empty()) sum.assign(dim, 0.0);
        for (size_t d = 0; d < dim; ++d) {
            sum[d] += samples[i][d];
            global[d] += samples[i][d];
        }
        ++count;
    }
    if (per_class.size() < 2) throw Error("separability needs at least 2 classes");
    for (const auto& [cls, sc] : per_class)
        if (sc.second < 2)
            throw Error("separability needs at least 2 samples per class");

    const double n = static_cast<double>(samples.size());
    for (auto& g : global) g /= n;

    double within = 0.0, between = 0.0;
    std::map<int, std::vector<double>> means;
    for (auto& [cls, sc] : per_class) {
        std::vector<double> mu(dim);
        for (size_t d = 0; d < dim; ++d) mu[d] = sc.first[d] / static_cast<double>(sc.second);
        double db = 0.0;
        for (size_t d = 0; d < dim; ++d) {
            const double diff = mu[d] - global[d];
            db += diff * diff;
        }
        between += static_cast<double>(sc.second) * db;
        means[cls] = std::move(mu);
    }
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& mu = means[classes[i]];
        for (size_t d = 0; d < dim; ++d) {
            const double diff = samples[i][d] - mu[d];
            within += diff * diff;
        }
    }

    const double total = within + between;
    if (total <= 1e-24) return 0.0; // everything coincides
    if (within <= 1e-12 * total)
        return std::numeric_limits<double>::infinity(); // collapsed classes apart
    return between / within;
}

} // namespace hsr
