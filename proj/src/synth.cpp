#include "hsr/synth.hpp"

#include "hsr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

namespace hsr {

namespace {

// Mixing weight pulling extra per-class variants toward an independent bump.
// Variants must survive RGB projection so color baselines see real intra-class
// spread; per-band noise cannot do that job because projection averages it away.
constexpr double kVariantBlend = 0.35;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void subtract_projection(std::vector<double>& v, const std::vector<double>& unit) {
    const double d = dot(v, unit);
    for (size_t i = 0; i < v.size(); ++i) v[i] -= d * unit[i];
}

std::vector<std::vector<double>> orthonormal_rows(const SpectralResponse& resp) {
    std::vector<std::vector<double>> rows;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> v(resp.weights.begin() + static_cast<size_t>(c) * resp.bands,
                              resp.weights.begin() + static_cast<size_t>(c + 1) * resp.bands);
        for (const auto& q : rows) subtract_projection(v, q);
        const double n = norm(v);
        if (n > 1e-12) {
            for (auto& x : v) x /= n;
            rows.push_back(std::move(v));
        }
    }
    return rows;
}

// First `count` orthonormal null-space vectors of the response, grown from
// Fourier start vectors ordered highest frequency first. High-frequency band
// ripple is nearly orthogonal to any smooth response, so the surviving
// directions spread over all bands and leave room for large steps inside
// [0,1] (a one-band spike would hit the box after a small step). Each
// direction is flipped so its largest component is positive. Deterministic,
// no RNG involved.
std::vector<std::vector<double>> null_space_directions(const SpectralResponse& resp,
                                                       int count) {
    const auto rows = orthonormal_rows(resp);
    const int D = resp.bands;
    std::vector<std::vector<double>> dirs;
    for (int f = D / 2; f >= 0 && static_cast<int>(dirs.size()) < count; --f) {
        for (int phase = 0; phase < 2 && static_cast<int>(dirs.size()) < count; ++phase) {
            std::vector<double> v(D);
            for (int b = 0; b < D; ++b) {
                const double arg = 2.0 * M_PI * f * b / D;
                v[b] = phase == 0 ? std::cos(arg) : std::sin(arg);
            }
            for (const auto& q : rows) subtract_projection(v, q);
            for (const auto& q : dirs) subtract_projection(v, q);
            const double n = norm(v);
            if (n > 1e-6) {
                size_t peak = 0;
                for (size_t b = 1; b < v.size(); ++b)
                    if (std::abs(v[b]) > std::abs(v[peak])) peak = b;
                const double s = (v[peak] < 0.0 ? -1.0 : 1.0) / n;
                for (auto& x : v) x *= s;
                dirs.push_back(std::move(v));
            }
        }
    }
    if (static_cast<int>(dirs.size()) < count)
        throw Error("response null space has fewer than " + std::to_string(count) +
                    " usable directions");
    return dirs;
}

// Largest t with base + t*v still inside [0,1] componentwise.
template <typename T>
double feasible_step(const std::vector<T>& base, const std::vector<double>& v) {
    double t = std::numeric_limits<double>::infinity();
    for (size_t b = 0; b < base.size(); ++b) {
        if (v[b] > 1e-15) t = std::min(t, (1.0 - base[b]) / v[b]);
        else if (v[b] < -1e-15) t = std::min(t, base[b] / -v[b]);
    }
    return t;
}

template <typename T>
std::vector<T> step_spectrum(const std::vector<T>& base,
                             const std::vector<double>& v, double t) {
    std::vector<T> out(base.size());
    for (size_t b = 0; b < base.size(); ++b)
        out[b] = static_cast<T>(std::clamp(base[b] + t * v[b], 0.0, 1.0));
    return out;
}

// Sum of a few random Gaussian bumps over band index, rescaled into
// [0.15, 0.85] so perturbations and noise have headroom before clipping.
std::vector<float> smooth_archetype(Rng& rng, int bands) {
    std::vector<double> v(bands, 0.0);
    for (int j = 0; j < 3; ++j) {
        const double amp = rng.real(0.3, 1.0);
        const double mu = rng.real(0.0, static_cast<double>(bands - 1));
        const double sigma = rng.real(bands / 20.0 + 0.5, bands / 6.0 + 1.0);
        for (int b = 0; b < bands; ++b) {
            const double z = (b - mu) / sigma;
            v[b] += amp * std::exp(-0.5 * z * z);
        }
    }
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    const double range = *mx - *mn;
    std::vector<float> out(bands);
    for (int b = 0; b < bands; ++b)
        out[b] = range < 1e-9
                     ? 0.5f
                     : static_cast<float>(0.15 + 0.7 * (v[b] - *mn) / range);
    return out;
}

} // namespace

void SceneConfig::validate() const {
    if (height < 1 || width < 1) throw Error("scene dimensions must be positive");
    if (num_classes < 2) throw Error("scene needs at least 2 classes");
    if (num_classes > 255)
        throw Error("class count " + std::to_string(num_classes) +
                    " exceeds palette capacity (255)");
    if (static_cast<long long>(num_classes) > static_cast<long long>(height) * width)
        throw Error("more classes than pixels");
    if (spectra_per_class < 1) throw Error("spectra_per_class must be at least 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw Error("noise_sigma must be finite and nonnegative");
    if (region_scale < 2) throw Error("region_scale must be at least 2");
    if (bands < 1) throw Error("scene needs at least 1 band");
    if (!(wavelength_step_nm > 0.0f)) throw Error("wavelength step must be positive");
    if (!(metamer_magnitude >= 0.0)) throw Error("metamer_magnitude must be nonnegative");
    std::set<int> used;
    for (const auto& [a, b] : metamer_pairs) {
        if (a < 1 || a > num_classes || b < 1 || b > num_classes)
            throw Error("metamer pair references class outside 1.." +
                        std::to_string(num_classes));
        if (a == b) throw Error("metamer pair must name two distinct classes");
        if (!used.insert(a).second || !used.insert(b).second)
            throw Error("class appears in more than one metamer pair");
    }
}

void DegradeConfig::validate() const {
    if (shrink_radius < 0) throw Error("shrink_radius must be nonnegative");
    if (boundary_jitter < 0) throw Error("boundary_jitter must be nonnegative");
    if (!(drop_fraction >= 0.0 && drop_fraction <= 1.0))
        throw Error("drop_fraction must lie in [0,1]");
    if (small_region_area < 0) throw Error("small_region_area must be nonnegative");
}

std::pair<std::vector<double>, std::vector<double>>
make_metamer_pair(const SpectralResponse& response, const std::vector<double>& base,
                  double magnitude) {
    response.validate();
    if (static_cast<int>(base.size()) != response.bands)
        throw Error("base spectrum length does not match response bands");
    if (response.bands <= 3)
        throw Error("null space empty: need more than 3 bands");
    for (double x : base)
        if (!(x >= 0.0 && x <= 1.0)) throw Error("base spectrum out of [0,1]");
    if (!(magnitude >= 0.0)) throw Error("magnitude must be nonnegative");

    const auto dirs = null_space_directions(response, 1);
    const auto& v = dirs[0];
    const double t = std::min(magnitude, feasible_step(base, v));
    if (magnitude >= 1e-6 && t < 1e-6)
        throw Error("metamer pair collapsed: clipping leaves step below 1e-6");
    return {base, step_spectrum(base, v, t)};
}

SceneData generate_scene_detailed(const SceneConfig& config) {
    config.validate();
    const int H = config.height, W = config.width;
    const int k = config.num_classes, V = config.spectra_per_class;
    const int D = config.bands;
    Rng root(config.seed);

    // Each metamer pair consumes one null direction shared by all variants, so
    // the partner class mirrors the lead class's RGB colors variant by variant
    // while every partner pixel sits a fixed spectral offset away. A shared
    // offset lands in the between-class separation; per-variant offsets would
    // mostly inflate within-class scatter instead.
    const int pair_count = static_cast<int>(config.metamer_pairs.size());
    std::vector<std::vector<double>> dirs;
    if (pair_count > 0) {
        if (D <= 3) throw Error("null space empty: need more than 3 bands");
        const SpectralResponse resp =
            default_rgb_response(D, config.wavelength_start_nm, config.wavelength_step_nm);
        dirs = null_space_directions(resp, pair_count);
    }

    std::vector<std::vector<float>> base(static_cast<size_t>(k) + 1);
    for (int c = 1; c <= k; ++c) {
        Rng ar = root.fork("archetype/" + std::to_string(c));
        base[c] = smooth_archetype(ar, D);
    }

    std::vector<int> lead_of(static_cast<size_t>(k) + 1, 0);
    for (const auto& [a, b] : config.metamer_pairs) lead_of[b] = a;

    // Extra variants blend toward an independent bump, so intra-class
    // variation survives RGB projection (unlike the band noise, which the
    // projection averages away).
    SceneData scene;
    scene.archetypes.resize(k);
    for (int c = 1; c <= k; ++c) {
        if (lead_of[c] != 0) continue;
        scene.archetypes[c - 1].push_back(base[c]);
        for (int v = 1; v < V; ++v) {
            Rng vr = root.fork("variant/" + std::to_string(c) + "/" + std::to_string(v));
            const std::vector<float> bump = smooth_archetype(vr, D);
            std::vector<float> mixed(D);
            for (int b = 0; b < D; ++b)
                mixed[b] = static_cast<float>((1.0 - kVariantBlend) * base[c][b] +
                                              kVariantBlend * bump[b]);
            scene.archetypes[c - 1].push_back(std::move(mixed));
        }
    }
    int pair_idx = 0;
    for (const auto& [a, b] : config.metamer_pairs) {
        const auto& lead = scene.archetypes[a - 1];
        auto& partner = scene.archetypes[b - 1];
        partner.clear();
        const auto& dir = dirs[pair_idx];
        double t = config.metamer_magnitude;
        for (int v = 0; v < V; ++v) t = std::min(t, feasible_step(lead[v], dir));
        if (config.metamer_magnitude >= 1e-6 && t < 1e-6)
            throw Error("metamer pair collapsed: clipping leaves step below 1e-6");
        for (int v = 0; v < V; ++v) partner.push_back(step_spectrum(lead[v], dir, t));
        ++pair_idx;
    }

    // Voronoi sites; a site always wins its own pixel, so every class keeps
    // at least one pixel once sites >= k.
    const long long area = static_cast<long long>(H) * W;
    const long long want = std::max<long long>(
        k, llround(static_cast<double>(area) /
                   (static_cast<double>(config.region_scale) * config.region_scale)));
    Rng srng = root.fork("sites");
    std::set<std::pair<int, int>> seen;
    std::vector<std::pair<int, int>> sites;
    while (static_cast<long long>(sites.size()) < want) {
        const int r = static_cast<int>(srng.below(static_cast<uint64_t>(H)));
        const int c = static_cast<int>(srng.below(static_cast<uint64_t>(W)));
        if (seen.insert({r, c}).second) sites.emplace_back(r, c);
    }

    std::vector<size_t> order(sites.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    {
        Rng crng = root.fork("site-classes");
        crng.shuffle(order);
    }
    std::vector<uint8_t> site_class(sites.size());
    for (size_t i = 0; i < order.size(); ++i)
        site_class[order[i]] = static_cast<uint8_t>(1 + i % k);

    std::vector<int> site_variant(sites.size(), 0);
    if (V > 1) {
        Rng vrng = root.fork("site-variants");
        for (auto& v : site_variant) v = static_cast<int>(vrng.below(static_cast<uint64_t>(V)));
    }

    scene.fine = LabelMap(H, W, k);
    std::vector<int> site_of(static_cast<size_t>(H) * W);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            long long best = std::numeric_limits<long long>::max();
            int bi = 0;
            for (size_t i = 0; i < sites.size(); ++i) {
                const long long dr = r - sites[i].first;
                const long long dc = c - sites[i].second;
                const long long d = dr * dr + dc * dc;
                if (d < best) {
                    best = d;
                    bi = static_cast<int>(i);
                }
            }
            site_of[static_cast<size_t>(r) * W + c] = bi;
            scene.fine.at(r, c) = site_class[bi];
        }

    scene.cube = HsiCube(H, W, D);
    scene.cube.wavelength_start_nm = config.wavelength_start_nm;
    scene.cube.wavelength_step_nm = config.wavelength_step_nm;
    Rng nrng = root.fork("noise");
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            const int site = site_of[static_cast<size_t>(r) * W + c];
            const auto& s = scene.archetypes[site_class[site] - 1][site_variant[site]];
            float* dst = scene.cube.spectrum(r, c);
            if (config.noise_sigma == 0.0) {
                std::memcpy(dst, s.data(), static_cast<size_t>(D) * sizeof(float));
            } else {
                for (int b = 0; b < D; ++b)
                    dst[b] = static_cast<float>(std::clamp(
                        s[b] + config.noise_sigma * nrng.normal(), 0.0, 1.0));
            }
        }
    return scene;
}

std::pair<HsiCube, LabelMap> generate_scene(const SceneConfig& config) {
    SceneData scene = generate_scene_detailed(config);
    return {std::move(scene.cube), std::move(scene.fine)};
}

LabelMap degrade_labels(const LabelMap& fine, const DegradeConfig& config) {
    fine.validate();
    config.validate();
    const int H = fine.height, W = fine.width;
    Rng root(config.seed);
    LabelMap out = fine;

    if (config.boundary_jitter > 0) {
        const int j = config.boundary_jitter;
        const int step = 8;
        const int gh = (H + step - 1) / step + 1;
        const int gw = (W + step - 1) / step + 1;
        Rng jrng = root.fork("jitter");
        std::vector<int> dr(static_cast<size_t>(gh) * gw), dc(dr.size());
        for (size_t i = 0; i < dr.size(); ++i) {
            dr[i] = static_cast<int>(jrng.below(2 * j + 1)) - j;
            dc[i] = static_cast<int>(jrng.below(2 * j + 1)) - j;
        }
        // Bilinear interpolation of integer control offsets, truncated toward
        // zero, keeps every displacement within +/- j.
        LabelMap warped(H, W, fine.num_classes);
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c) {
                const double gr = static_cast<double>(r) / step;
                const double gc = static_cast<double>(c) / step;
                const int r0 = static_cast<int>(gr);
                const int c0 = static_cast<int>(gc);
                const double fr = gr - r0, fc = gc - c0;
                auto lerp2 = [&](const std::vector<int>& g) {
                    const double v00 = g[static_cast<size_t>(r0) * gw + c0];
                    const double v01 = g[static_cast<size_t>(r0) * gw + c0 + 1];
                    const double v10 = g[(static_cast<size_t>(r0) + 1) * gw + c0];
                    const double v11 = g[(static_cast<size_t>(r0) + 1) * gw + c0 + 1];
                    return (1 - fr) * ((1 - fc) * v00 + fc * v01) +
                           fr * ((1 - fc) * v10 + fc * v11);
                };
                const int ddr = static_cast<int>(lerp2(dr));
                const int ddc = static_cast<int>(lerp2(dc));
                const int sr = std::clamp(r + ddr, 0, H - 1);
                const int sc = std::clamp(c + ddc, 0, W - 1);
                warped.at(r, c) = fine.at(sr, sc);
            }
        out = std::move(warped);
    }

    if (config.shrink_radius > 0) {
        const int R = config.shrink_radius;
        LabelMap shrunk(H, W, fine.num_classes);
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c) {
                const uint8_t cls = out.at(r, c);
                if (cls == 0) continue;
                bool keep = true;
                for (int dr2 = -R; dr2 <= R && keep; ++dr2)
                    for (int dc2 = -R; dc2 <= R; ++dc2) {
                        const int rr = r + dr2, cc = c + dc2;
                        if (rr < 0 || rr >= H || cc < 0 || cc >= W ||
                            out.at(rr, cc) != cls) {
                            keep = false;
                            break;
                        }
                    }
                shrunk.at(r, c) = keep ? cls : 0;
            }
        out = std::move(shrunk);
    }

    if (config.drop_fraction > 0.0) {
        // 4-connected same-class components; small ones are drop candidates.
        std::vector<int> comp(static_cast<size_t>(H) * W, -1);
        std::vector<std::vector<int>> members;
        std::vector<int> stack;
        for (int start = 0; start < H * W; ++start) {
            if (out.data[start] == 0 || comp[start] >= 0) continue;
            const uint8_t cls = out.data[start];
            const int id = static_cast<int>(members.size());
            members.emplace_back();
            comp[start] = id;
            stack.assign(1, start);
            while (!stack.empty()) {
                const int px = stack.back();
                stack.pop_back();
                members[id].push_back(px);
                const int r = px / W, c = px % W;
                const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
                for (const auto& n : nbr) {
                    if (n[0] < 0 || n[0] >= H || n[1] < 0 || n[1] >= W) continue;
                    const int q = n[0] * W + n[1];
                    if (comp[q] < 0 && out.data[q] == cls) {
                        comp[q] = id;
                        stack.push_back(q);
                    }
                }
            }
        }
        std::vector<int> small;
        for (size_t i = 0; i < members.size(); ++i)
            if (static_cast<int>(members[i].size()) < config.small_region_area)
                small.push_back(static_cast<int>(i));
        const long long n_drop =
            llround(config.drop_fraction * static_cast<double>(small.size()));
        Rng drng = root.fork("drop");
        drng.shuffle(small);
        for (long long i = 0; i < n_drop; ++i)
            for (int px : members[small[i]]) out.data[px] = 0;
    }

    if (out.count_nonbackground() == 0) throw Error("empty coarse label");
    return out;
}

} // namespace hsr
