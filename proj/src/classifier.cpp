#include "hsr/classifier.hpp"

#include "hsr/cube_io.hpp"
#include "hsr/io_util.hpp"
#include "hsr/parallel.hpp"
#include "hsr/patch.hpp"
#include "hsr/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace hsr {

using nlohmann::json;

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw Error("learning_rate must be finite and nonnegative");
    if (!(weight_decay >= 0.0 && weight_decay < 1.0))
        throw Error("weight_decay must lie in [0,1)");
    if (epochs < 1) throw Error("epochs must be positive");
    if (pixels_per_image < 1) throw Error("pixels_per_image must be positive");
    if (cube_batch < 1) throw Error("cube_batch must be positive");
    if (image_batch < 1) throw Error("image_batch must be positive");
    if (patch_size < 1 || patch_size % 2 == 0)
        throw Error("patch_size must be odd and positive");
}

std::vector<std::pair<int, int>> ClassifierModel::layer_shapes() const {
    std::vector<int> dims;
    dims.push_back(bands);
    for (int h : arch.hidden) dims.push_back(h);
    dims.push_back(num_classes);
    std::vector<std::pair<int, int>> shapes;
    for (size_t l = 0; l + 1 < dims.size(); ++l)
        shapes.emplace_back(dims[l], dims[l + 1]);
    return shapes;
}

size_t ClassifierModel::expected_param_count() const {
    size_t n = 0;
    for (const auto& [in, out] : layer_shapes())
        n += static_cast<size_t>(in) * out + out;
    return n;
}

void ClassifierModel::validate() const {
    if (patch_size < 1 || patch_size % 2 == 0)
        throw Error("model patch size must be odd and positive");
    if (bands < 1 || num_classes < 1)
        throw Error("model needs at least one band and one class");
    for (int h : arch.hidden)
        if (h < 1) throw Error("hidden layer width must be positive");
    if (params.size() != expected_param_count())
        throw Error("parameter count " + std::to_string(params.size()) +
                    " does not match architecture (expected " +
                    std::to_string(expected_param_count()) + ")");
    for (double p : params)
        if (!std::isfinite(p)) throw Error("model parameter is not finite");
}

std::vector<double> ClassifierModel::forward_pooled(const double* pooled) const {
    const auto shapes = layer_shapes();
    std::vector<double> act(pooled, pooled + bands);
    size_t off = 0;
    for (size_t l = 0; l < shapes.size(); ++l) {
        const auto [in, out] = shapes[l];
        std::vector<double> next(out);
        for (int o = 0; o < out; ++o) {
            double z = params[off + static_cast<size_t>(in) * out + o]; // bias
            const double* w = &params[off + static_cast<size_t>(o) * in];
            for (int i = 0; i < in; ++i) z += w[i] * act[i];
            next[o] = l + 1 < shapes.size() ? std::tanh(z) : z;
        }
        act = std::move(next);
        off += static_cast<size_t>(in) * out + out;
    }
    return act;
}

std::vector<double> ClassifierModel::forward(const Patch& patch) const {
    if (patch.size != patch_size || patch.bands != bands)
        throw Error("patch shape does not match model input shape");
    const auto pooled = pool_patch(patch);
    return forward_pooled(pooled.data());
}

ClassifierModel make_model(int patch_size, int bands, int num_classes,
                           const ArchConfig& arch, uint64_t seed) {
    ClassifierModel m;
    m.patch_size = patch_size;
    m.bands = bands;
    m.num_classes = num_classes;
    m.arch = arch;
    m.params.resize(m.expected_param_count());
    Rng rng(seed);
    size_t off = 0;
    for (const auto& [in, out] : m.layer_shapes()) {
        const double s = 1.0 / std::sqrt(static_cast<double>(in));
        const size_t n = static_cast<size_t>(in) * out + out;
        for (size_t i = 0; i < n; ++i) m.params[off + i] = rng.real(-s, s);
        off += n;
    }
    m.validate();
    return m;
}

std::vector<double> pool_patch(const Patch& patch) {
    const int S = patch.size, D = patch.bands;
    std::vector<double> pooled(D);
    const double inv = 1.0 / (static_cast<double>(S) * S);
    for (int b = 0; b < D; ++b) {
        double acc = 0.0;
        for (int py = 0; py < S; ++py)
            for (int px = 0; px < S; ++px) acc += patch.at(py, px, b);
        pooled[b] = acc * inv;
    }
    return pooled;
}

double cross_entropy_loss(const std::vector<double>& logits, int c) {
    if (logits.empty()) throw Error("empty logit vector");
    if (c < 0 || c >= static_cast<int>(logits.size()))
        throw Error("class index " + std::to_string(c) + " out of range for " +
                    std::to_string(logits.size()) + " logits");
    double mx = logits[0];
    for (double z : logits) {
        if (!std::isfinite(z)) throw Error("non-finite logit");
        mx = std::max(mx, z);
    }
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - mx);
    return -(logits[c] - mx) + std::log(sum);
}

namespace {

std::vector<size_t> sample_pixel_indices(const LabelMap& coarse, int want, Rng& rng) {
    std::vector<size_t> pool;
    for (size_t i = 0; i < coarse.data.size(); ++i)
        if (coarse.data[i] != 0) pool.push_back(i);
    if (pool.empty()) throw Error("label map has zero non-background pixels");
    const size_t take = std::min<size_t>(static_cast<size_t>(want), pool.size());
    for (size_t i = 0; i < take; ++i) {
        const size_t j = i + static_cast<size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    return pool;
}

struct PotEntry {
    int frame;
    size_t pixel;
    int class_index; // 0-based
};

// Per-band mean of the mirror-padded window at every pixel. Identical
// summation order to pool_patch(extract_patch(...)), so results are
// bit-identical to the patch path.
std::vector<double> pooled_frame_features(const HsiCube& cube, int S, int threads) {
    const int H = cube.height, W = cube.width, D = cube.bands;
    const int half = (S - 1) / 2;
    const double inv = 1.0 / (static_cast<double>(S) * S);
    std::vector<double> pooled(static_cast<size_t>(H) * W * D);
    parallel_for(static_cast<size_t>(H), threads, [&](size_t r0, size_t r1) {
        std::vector<int> mr(S), mc(S);
        for (size_t r = r0; r < r1; ++r) {
            for (int py = 0; py < S; ++py)
                mr[py] = mirror_index(static_cast<int>(r) - half + py, H);
            for (int c = 0; c < W; ++c) {
                for (int px = 0; px < S; ++px)
                    mc[px] = mirror_index(c - half + px, W);
                double* dst = &pooled[(r * W + c) * D];
                for (int b = 0; b < D; ++b) {
                    double acc = 0.0;
                    for (int py = 0; py < S; ++py)
                        for (int px = 0; px < S; ++px)
                            acc += cube.at(mr[py], mc[px], b);
                    dst[b] = acc * inv;
                }
            }
        }
    });
    return pooled;
}

// Sum of per-sample losses and gradients over [begin, end) of the batch.
double accumulate_gradient(const ClassifierModel& m,
                           const std::vector<std::pair<const double*, int>>& batch,
                           size_t begin, size_t end, std::vector<double>& grad) {
    const auto shapes = m.layer_shapes();
    const size_t L = shapes.size();
    std::vector<size_t> offsets(L);
    {
        size_t off = 0;
        for (size_t l = 0; l < L; ++l) {
            offsets[l] = off;
            off += static_cast<size_t>(shapes[l].first) * shapes[l].second +
                   shapes[l].second;
        }
    }

    double loss_sum = 0.0;
    std::vector<std::vector<double>> act(L + 1);
    for (size_t s = begin; s < end; ++s) {
        const double* x = batch[s].first;
        const int c = batch[s].second;

        act[0].assign(x, x + m.bands);
        for (size_t l = 0; l < L; ++l) {
            const auto [in, out] = shapes[l];
            act[l + 1].assign(out, 0.0);
            for (int o = 0; o < out; ++o) {
                double z = m.params[offsets[l] + static_cast<size_t>(in) * out + o];
                const double* w = &m.params[offsets[l] + static_cast<size_t>(o) * in];
                for (int i = 0; i < in; ++i) z += w[i] * act[l][i];
                act[l + 1][o] = l + 1 < L ? std::tanh(z) : z;
            }
        }
        const std::vector<double>& logits = act[L];
        for (double z : logits)
            if (!std::isfinite(z)) // surfaces as the diverged-training error
                return std::numeric_limits<double>::quiet_NaN();
        loss_sum += cross_entropy_loss(logits, c);

        // dz for the top layer: softmax(logits) - onehot(c).
        double mx = logits[0];
        for (double z : logits) mx = std::max(mx, z);
        double denom = 0.0;
        for (double z : logits) denom += std::exp(z - mx);
        std::vector<double> dz(logits.size());
        for (size_t j = 0; j < logits.size(); ++j)
            dz[j] = std::exp(logits[j] - mx) / denom;
        dz[c] -= 1.0;

        for (size_t l = L; l-- > 0;) {
            const auto [in, out] = shapes[l];
            double* gw = &grad[offsets[l]];
            double* gb = &grad[offsets[l] + static_cast<size_t>(in) * out];
            const std::vector<double>& a = act[l];
            for (int o = 0; o < out; ++o) {
                gb[o] += dz[o];
                double* row = gw + static_cast<size_t>(o) * in;
                for (int i = 0; i < in; ++i) row[i] += dz[o] * a[i];
            }
            if (l == 0) break;
            std::vector<double> da(in, 0.0);
            for (int o = 0; o < out; ++o) {
                const double* w = &m.params[offsets[l] + static_cast<size_t>(o) * in];
                for (int i = 0; i < in; ++i) da[i] += w[i] * dz[o];
            }
            dz.assign(in, 0.0);
            for (int i = 0; i < in; ++i) dz[i] = (1.0 - a[i] * a[i]) * da[i];
        }
    }
    return loss_sum;
}

// Mean loss and mean gradient over the batch. Gradients are reduced in fixed
// 32-sample chunks summed in chunk order, so the result does not depend on
// the thread count.
double batch_gradient(const ClassifierModel& m,
                      const std::vector<std::pair<const double*, int>>& batch,
                      std::vector<double>& grad, int threads) {
    constexpr size_t kChunk = 32;
    const size_t n_chunks = (batch.size() + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> chunk_grads(n_chunks);
    std::vector<double> chunk_losses(n_chunks, 0.0);
    parallel_for(n_chunks, threads, [&](size_t lo, size_t hi) {
        for (size_t ci = lo; ci < hi; ++ci) {
            chunk_grads[ci].assign(m.params.size(), 0.0);
            const size_t b0 = ci * kChunk;
            const size_t b1 = std::min(batch.size(), b0 + kChunk);
            chunk_losses[ci] = accumulate_gradient(m, batch, b0, b1, chunk_grads[ci]);
        }
    });
    grad.assign(m.params.size(), 0.0);
    double loss = 0.0;
    for (size_t ci = 0; ci < n_chunks; ++ci) {
        loss += chunk_losses[ci];
        for (size_t i = 0; i < grad.size(); ++i) grad[i] += chunk_grads[ci][i];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& g : grad) g *= inv;
    return loss * inv;
}

} // namespace

std::vector<TrainingSample> sample_training_cubes(const HsiCube& cube,
                                                  const LabelMap& coarse,
                                                  const TrainConfig& config) {
    config.validate();
    if (cube.height != coarse.height || cube.width != coarse.width)
        throw Error("cube and label dimensions disagree");
    Rng rng(derive_seed(config.seed, "sample"));
    const auto picks = sample_pixel_indices(coarse, config.pixels_per_image, rng);
    std::vector<TrainingSample> out;
    out.reserve(picks.size());
    for (size_t flat : picks) {
        const int r = static_cast<int>(flat / cube.width);
        const int c = static_cast<int>(flat % cube.width);
        out.push_back({extract_patch(cube, r, c, config.patch_size),
                       coarse.data[flat] - 1});
    }
    return out;
}

TrainResult train_frames(
    const std::vector<std::pair<const HsiCube*, const LabelMap*>>& frames,
    int num_classes, const TrainConfig& config, int threads) {
    config.validate();
    if (frames.empty()) throw Error("training needs at least one frame");
    if (num_classes < 1) throw Error("training needs at least one class");
    const int S = config.patch_size;
    const int D = frames.front().first->bands;
    for (const auto& [cube, coarse] : frames) {
        if (cube->bands != D) throw Error("frames disagree on band count");
        if (cube->height != coarse->height || cube->width != coarse->width)
            throw Error("cube and label dimensions disagree");
        if (S > 2 * std::min(cube->height, cube->width) - 1)
            throw Error("patch size " + std::to_string(S) +
                        " exceeds mirror limit for a training frame");
    }

    std::vector<std::vector<double>> pooled(frames.size());
    for (size_t f = 0; f < frames.size(); ++f)
        pooled[f] = pooled_frame_features(*frames[f].first, S, threads);

    Rng root(config.seed);
    ClassifierModel model =
        make_model(S, D, num_classes, ArchConfig{}, derive_seed(config.seed, "init"));

    TrainResult result;
    std::vector<double> grad;
    std::vector<PotEntry> pot;
    std::vector<std::pair<const double*, int>> batch;
    for (int e = 0; e < config.epochs; ++e) {
        Rng ep = root.fork("epoch/" + std::to_string(e));
        std::vector<int> order(frames.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        ep.shuffle(order);

        double loss_sum = 0.0;
        size_t loss_count = 0;
        int step = 0;
        for (size_t g0 = 0; g0 < order.size();
             g0 += static_cast<size_t>(config.image_batch)) {
            const size_t g1 =
                std::min(order.size(), g0 + static_cast<size_t>(config.image_batch));
            pot.clear();
            for (size_t gi = g0; gi < g1; ++gi) {
                const int f = order[gi];
                const auto picks =
                    sample_pixel_indices(*frames[f].second, config.pixels_per_image, ep);
                for (size_t flat : picks)
                    pot.push_back({f, flat, frames[f].second->data[flat] - 1});
            }
            ep.shuffle(pot);

            for (size_t b0 = 0; b0 < pot.size();
                 b0 += static_cast<size_t>(config.cube_batch)) {
                const size_t b1 =
                    std::min(pot.size(), b0 + static_cast<size_t>(config.cube_batch));
                batch.clear();
                for (size_t i = b0; i < b1; ++i)
                    batch.emplace_back(&pooled[pot[i].frame][pot[i].pixel * D],
                                       pot[i].class_index);
                const double loss = batch_gradient(model, batch, grad, threads);
                ++step;
                if (!std::isfinite(loss))
                    throw Error("training diverged at epoch " + std::to_string(e + 1) +
                                ", step " + std::to_string(step));
                loss_sum += loss * static_cast<double>(batch.size());
                loss_count += batch.size();
                for (size_t i = 0; i < model.params.size(); ++i)
                    model.params[i] = (1.0 - config.weight_decay) * model.params[i] -
                                      config.learning_rate * grad[i];
            }
        }
        result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(loss_count));
    }

    model.epochs_seen = config.epochs;
    model.final_loss = result.epoch_mean_loss.back();
    model.validate();
    result.model = std::move(model);
    return result;
}

TrainResult train(const DatasetManifest& manifest, const TrainConfig& config,
                  int threads) {
    std::vector<HsiCube> cubes;
    std::vector<LabelMap> labels;
    cubes.reserve(manifest.frames.size());
    labels.reserve(manifest.frames.size());
    for (const auto& f : manifest.frames) {
        cubes.push_back(load_cube(f.cube_path));
        labels.push_back(load_label(f.coarse_path, manifest.num_classes));
    }
    std::vector<std::pair<const HsiCube*, const LabelMap*>> frames;
    for (size_t i = 0; i < cubes.size(); ++i)
        frames.emplace_back(&cubes[i], &labels[i]);
    return train_frames(frames, manifest.num_classes, config, threads);
}

LogitMap predict_map(const ClassifierModel& model, const HsiCube& cube, int threads) {
    model.validate();
    if (cube.bands != model.bands)
        throw Error("cube bands do not match model input shape");
    const int S = model.patch_size;
    if (S > 2 * std::min(cube.height, cube.width) - 1)
        throw Error("patch size " + std::to_string(S) + " exceeds mirror limit");

    const int H = cube.height, W = cube.width, D = cube.bands;
    const int half = (S - 1) / 2;
    const double inv = 1.0 / (static_cast<double>(S) * S);
    LogitMap out(H, W, model.num_classes);
    parallel_for(static_cast<size_t>(H), threads, [&](size_t r0, size_t r1) {
        std::vector<int> mr(S), mc(S);
        std::vector<double> pooled(D);
        for (size_t r = r0; r < r1; ++r) {
            for (int py = 0; py < S; ++py)
                mr[py] = mirror_index(static_cast<int>(r) - half + py, H);
            for (int c = 0; c < W; ++c) {
                for (int px = 0; px < S; ++px)
                    mc[px] = mirror_index(c - half + px, W);
                for (int b = 0; b < D; ++b) {
                    double acc = 0.0;
                    for (int py = 0; py < S; ++py)
                        for (int px = 0; px < S; ++px)
                            acc += cube.at(mr[py], mc[px], b);
                    pooled[b] = acc * inv;
                }
                const auto logits = model.forward_pooled(pooled.data());
                float* dst = out.logits(static_cast<int>(r), c);
                for (int j = 0; j < model.num_classes; ++j)
                    dst[j] = static_cast<float>(logits[j]);
            }
        }
    });
    return out;
}

double gradient_check(const ClassifierModel& model,
                      const std::vector<TrainingSample>& batch, int probes,
                      uint64_t seed) {
    if (model.params.empty()) throw Error("no parameters");
    model.validate();
    if (batch.empty()) throw Error("empty batch");
    if (probes < 1) throw Error("probes must be positive");

    std::vector<std::vector<double>> features;
    std::vector<std::pair<const double*, int>> pairs;
    features.reserve(batch.size());
    for (const auto& s : batch) {
        if (s.patch.size != model.patch_size || s.patch.bands != model.bands)
            throw Error("patch shape does not match model input shape");
        if (s.class_index < 0 || s.class_index >= model.num_classes)
            throw Error("sample class out of range");
        features.push_back(pool_patch(s.patch));
    }
    for (size_t i = 0; i < batch.size(); ++i)
        pairs.emplace_back(features[i].data(), batch[i].class_index);

    std::vector<double> grad;
    batch_gradient(model, pairs, grad, 1);

    std::vector<size_t> idx(model.params.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const size_t take = std::min<size_t>(static_cast<size_t>(probes), idx.size());
    Rng rng(derive_seed(seed, "gradient-check"));
    for (size_t i = 0; i < take; ++i) {
        const size_t j = i + static_cast<size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }

    ClassifierModel probe = model;
    auto mean_loss = [&]() {
        double sum = 0.0;
        for (const auto& [x, c] : pairs)
            sum += cross_entropy_loss(probe.forward_pooled(x), c);
        return sum / static_cast<double>(pairs.size());
    };

    const double h = 1e-5;
    double worst = 0.0;
    for (size_t i = 0; i < take; ++i) {
        const size_t p = idx[i];
        const double saved = probe.params[p];
        probe.params[p] = saved + h;
        const double lp = mean_loss();
        probe.params[p] = saved - h;
        const double lm = mean_loss();
        probe.params[p] = saved;
        const double numeric = (lp - lm) / (2.0 * h);
        const double analytic = grad[p];
        const double denom =
            std::max({std::abs(analytic), std::abs(numeric), 1e-4});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
    return worst;
}

void save_model(const ClassifierModel& model, const std::string& path) {
    model.validate();
    json header = {{"patch_size", model.patch_size},
                   {"bands", model.bands},
                   {"num_classes", model.num_classes},
                   {"hidden", model.arch.hidden},
                   {"epochs_seen", model.epochs_seen},
                   {"final_loss", model.final_loss},
                   {"param_count", model.params.size()}};
    const std::string htext = header.dump();

    std::vector<uint8_t> out;
    out.reserve(8 + htext.size() + model.params.size() * 8);
    const char magic[4] = {'H', 'S', 'R', 'M'};
    out.insert(out.end(), magic, magic + 4);
    put_u32(out, static_cast<uint32_t>(htext.size()));
    out.insert(out.end(), htext.begin(), htext.end());
    for (double p : model.params) put_f64(out, p);
    atomic_write_file(path, out.data(), out.size());
}

ClassifierModel load_model(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file(path);
    if (bytes.size() < 8 || std::memcmp(bytes.data(), "HSRM", 4) != 0)
        throw Error("not a model file: " + path);
    const uint32_t hlen = get_u32(bytes.data() + 4);
    if (bytes.size() < 8 + static_cast<size_t>(hlen))
        throw Error("model file truncated: " + path);
    const json header = json::parse(
        std::string(reinterpret_cast<const char*>(bytes.data()) + 8, hlen));

    ClassifierModel m;
    m.patch_size = header.at("patch_size").get<int>();
    m.bands = header.at("bands").get<int>();
    m.num_classes = header.at("num_classes").get<int>();
    m.arch.hidden = header.at("hidden").get<std::vector<int>>();
    m.epochs_seen = header.at("epochs_seen").get<int>();
    m.final_loss = header.at("final_loss").get<double>();
    const size_t count = header.at("param_count").get<size_t>();
    if (bytes.size() != 8 + hlen + count * 8)
        throw Error("model parameter payload size mismatch: " + path);
    m.params.resize(count);
    for (size_t i = 0; i < count; ++i)
        m.params[i] = get_f64(bytes.data() + 8 + hlen + i * 8);
    m.validate();
    return m;
}

} // namespace hsr
