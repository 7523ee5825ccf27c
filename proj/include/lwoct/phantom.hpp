#pragma once

#include "lwoct/error.hpp"
#include "lwoct/image.hpp"
#include "lwoct/types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace lwoct {

struct PhantomLayer {
    std::optional<BoundaryId> id; // truth key for the interface at the top of this layer
    std::vector<double> curve;    // per-column row of the interface
    double intensity_above = 0.0;
    double intensity_below = 0.0;
};

struct PhantomBand {
    std::vector<double> curve;
    double half_width_px = 0.0;
    double intensity = 1.0;
};

struct PhantomBlob {
    double cx = 0.0, cy = 0.0;
    double ax = 1.0, ay = 1.0; // semi-axes
    double intensity = 0.0;
};

struct ShadowRun {
    int x0 = 0, x1 = 0; // inclusive
    double factor = 0.3;
};

struct PhantomSpec {
    int width = 0;
    int height = 0;
    std::vector<PhantomLayer> layers;
    std::optional<PhantomBand> bright_band;
    std::vector<PhantomBlob> blobs;
    std::vector<ShadowRun> shadow_runs;
    double speckle_sigma = 0.15;
    std::uint64_t rng_seed = 0;
};

struct PhantomTruth {
    std::map<BoundaryId, std::vector<double>> boundaries;
    std::vector<BinaryImage> fluid_masks;
    std::set<int> shadow_columns;
    std::vector<double> band_curve; // empty without a bright band
};

struct Phantom {
    BScan bscan;
    PhantomTruth truth;
};

inline void validate(const PhantomSpec& s)
{
    auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidSpec, m); };
    if (s.width < 2 || s.height < 2)
        bad("phantom must be at least 2x2");
    if (!(s.speckle_sigma >= 0.0))
        bad("speckle_sigma must be >= 0");
    const double top = s.height - 1;
    auto check_curve = [&](const std::vector<double>& c, const std::string& what) {
        if (static_cast<int>(c.size()) != s.width)
            bad(what + ": curve length must equal width");
        for (double v : c)
            if (!(v >= 0.0 && v <= top))
                bad(what + ": curve leaves the image rows");
    };
    for (std::size_t i = 0; i < s.layers.size(); ++i) {
        check_curve(s.layers[i].curve, "layer " + std::to_string(i));
        if (i > 0)
            for (int x = 0; x < s.width; ++x)
                if (s.layers[i].curve[static_cast<std::size_t>(x)] < s.layers[i - 1].curve[static_cast<std::size_t>(x)])
                    bad("layers must be vertically ordered");
    }
    if (s.bright_band) {
        check_curve(s.bright_band->curve, "bright band");
        if (!(s.bright_band->half_width_px >= 0.0))
            bad("bright band half width must be >= 0");
    }
    for (const auto& b : s.blobs)
        if (!(b.ax > 0.0 && b.ay > 0.0))
            bad("blob axes must be positive");
    for (const auto& r : s.shadow_runs)
        if (r.x0 < 0 || r.x1 >= s.width || r.x0 > r.x1 || !(r.factor >= 0.0))
            bad("invalid shadow run");
}

/// Piecewise-constant layers, then bright band, blobs, shadows and multiplicative speckle.
inline Phantom generate(const PhantomSpec& spec)
{
    validate(spec);
    const int w = spec.width, h = spec.height;
    Phantom out{BScan{GrayImage(w, h, 0.0), 0}, {}};
    GrayImage& img = out.bscan.pixels;

    for (int x = 0; x < w; ++x)
        for (int y = 0; y < h; ++y) {
            double v = spec.layers.empty() ? 0.0 : spec.layers.front().intensity_above;
            for (const auto& l : spec.layers)
                if (y >= l.curve[static_cast<std::size_t>(x)])
                    v = l.intensity_below;
            img(x, y) = v;
        }
    for (const auto& l : spec.layers)
        if (l.id)
            out.truth.boundaries[*l.id] = l.curve;

    if (spec.bright_band) {
        const auto& b = *spec.bright_band;
        for (int x = 0; x < w; ++x)
            for (int y = 0; y < h; ++y)
                if (std::abs(y - b.curve[static_cast<std::size_t>(x)]) <= b.half_width_px)
                    img(x, y) = b.intensity;
        out.truth.band_curve = b.curve;
    }

    for (const auto& b : spec.blobs) {
        BinaryImage mask(w, h, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double u = (x - b.cx) / b.ax, v = (y - b.cy) / b.ay;
                if (u * u + v * v <= 1.0) {
                    mask(x, y) = 1;
                    img(x, y) = b.intensity;
                }
            }
        out.truth.fluid_masks.push_back(std::move(mask));
    }

    for (const auto& r : spec.shadow_runs)
        for (int x = r.x0; x <= r.x1; ++x) {
            out.truth.shadow_columns.insert(x);
            for (int y = 0; y < h; ++y)
                img(x, y) *= r.factor;
        }

    if (spec.speckle_sigma > 0.0) {
        std::mt19937_64 rng(spec.rng_seed);
        std::normal_distribution<double> noise(0.0, spec.speckle_sigma);
        for (auto& p : img.pixels())
            p = std::clamp(p * (1.0 + noise(rng)), 0.0, 1.0);
    } else {
        for (auto& p : img.pixels())
            p = std::clamp(p, 0.0, 1.0);
    }
    return out;
}

/// offset + linear (x - c) + quadratic (x - c)^2 + sum of A sin(2 pi x / P + phase).
struct CurveModel {
    double offset = 0.0;
    double linear = 0.0;
    double quadratic = 0.0;
    double center = 0.0;
    struct Sine {
        double amplitude = 0.0, period_px = 1.0, phase = 0.0;
    };
    std::vector<Sine> sines;

    std::vector<double> sample(int width) const
    {
        std::vector<double> c(static_cast<std::size_t>(width));
        for (int x = 0; x < width; ++x) {
            const double d = x - center;
            double v = offset + linear * d + quadratic * d * d;
            for (const auto& s : sines)
                v += s.amplitude * std::sin(2.0 * std::numbers::pi * x / s.period_px + s.phase);
            c[static_cast<std::size_t>(x)] = v;
        }
        return c;
    }
};

namespace detail {

inline CurveModel random_wave(std::mt19937_64& rng, double offset, double amp_lo, double amp_hi, double per_lo,
                              double per_hi)
{
    std::uniform_real_distribution<double> amp(amp_lo, amp_hi), per(per_lo, per_hi),
        phase(0.0, 2.0 * std::numbers::pi);
    CurveModel m;
    m.offset = offset;
    m.sines.push_back({amp(rng), per(rng), phase(rng)});
    return m;
}

inline std::vector<double> add(std::vector<double> a, const std::vector<double>& b)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] += b[i];
    return a;
}

} // namespace detail

/// Three smooth macular interfaces (ILM, IPL_INL, OPL_ONL) with seeded random shapes.
inline PhantomSpec macular_phantom_spec(int width, int height, std::uint64_t seed, double speckle_sigma = 0.15)
{
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const double scale = height / 496.0;
    auto ilm = detail::random_wave(rng, 150.0 * scale, 8.0 * scale, 20.0 * scale, 350.0, 700.0);
    ilm.sines.push_back(detail::random_wave(rng, 0.0, 2.0 * scale, 5.0 * scale, 150.0, 300.0).sines.front());
    const auto c0 = ilm.sample(width);
    const auto c1 = detail::add(c0, detail::random_wave(rng, 70.0 * scale, 3.0 * scale, 8.0 * scale, 300.0, 600.0).sample(width));
    const auto c2 = detail::add(c1, detail::random_wave(rng, 45.0 * scale, 2.0 * scale, 6.0 * scale, 300.0, 600.0).sample(width));

    PhantomSpec s;
    s.width = width;
    s.height = height;
    s.layers = {{BoundaryId::ILM, c0, 0.1, 0.8}, {BoundaryId::IPL_INL, c1, 0.8, 0.5}, {BoundaryId::OPL_ONL, c2, 0.5, 0.2}};
    s.speckle_sigma = speckle_sigma;
    s.rng_seed = seed;
    return s;
}

/// Curved circumpapillary-like scan: three interfaces riding on a bright RPE band that follows a
/// parabola, plus three vessel-shadow column runs placed between multiples of 100.
inline PhantomSpec peripapillary_phantom_spec(int width, int height, std::uint64_t seed, double speckle_sigma = 0.15)
{
    std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
    const double c = 0.5 * (width - 1);
    CurveModel band;
    band.offset = 0.64 * height;
    band.center = c;
    band.quadratic = -0.12 * height / (c * c);
    const auto rpe = band.sample(width);

    auto ilm = detail::add(rpe, detail::random_wave(rng, -150.0 * height / 496.0, 3.0, 8.0, 300.0, 600.0).sample(width));
    auto ipl = detail::add(ilm, detail::random_wave(rng, 55.0 * height / 496.0, 2.0, 5.0, 300.0, 600.0).sample(width));
    auto opl = detail::add(ipl, detail::random_wave(rng, 40.0 * height / 496.0, 2.0, 5.0, 300.0, 600.0).sample(width));

    PhantomSpec s;
    s.width = width;
    s.height = height;
    s.layers = {{BoundaryId::ILM, ilm, 0.1, 0.7}, {BoundaryId::IPL_INL, ipl, 0.7, 0.45}, {BoundaryId::OPL_ONL, opl, 0.45, 0.2}};
    s.bright_band = PhantomBand{rpe, 5.0, 0.95};
    std::uniform_int_distribution<int> len(4, 10);
    for (int k = 0; k < 3; ++k) {
        const int lo = 100 * (k + 1) + 15, hi = 100 * (k + 2) - 25;
        if (hi >= width)
            break;
        const int run = len(rng);
        std::uniform_int_distribution<int> start(lo, std::max(lo, hi - run));
        const int x0 = start(rng);
        s.shadow_runs.push_back({x0, x0 + run - 1, 0.3});
    }
    s.speckle_sigma = speckle_sigma;
    s.rng_seed = seed;
    return s;
}

namespace detail {

inline std::vector<double> curve_from_json(const nlohmann::json& j, int width)
{
    if (j.is_array())
        return j.get<std::vector<double>>();
    if (!j.is_object())
        throw Error(ErrorCode::InvalidSpec, "curve must be an array or a model object");
    CurveModel m;
    m.offset = j.value("offset", 0.0);
    m.linear = j.value("linear", 0.0);
    m.quadratic = j.value("quadratic", 0.0);
    m.center = j.value("center", 0.5 * (width - 1));
    if (j.contains("sines"))
        for (const auto& s : j.at("sines"))
            m.sines.push_back({s.value("amplitude", 0.0), s.value("period_px", 1.0), s.value("phase", 0.0)});
    return m.sample(width);
}

} // namespace detail

/// Reads a PhantomSpec; curves are either explicit per-column arrays or CurveModel objects.
inline PhantomSpec phantom_spec_from_json(const nlohmann::json& j)
{
    try {
        PhantomSpec s;
        s.width = j.at("width").get<int>();
        s.height = j.at("height").get<int>();
        s.speckle_sigma = j.value("speckle_sigma", 0.15);
        s.rng_seed = j.value("rng_seed", std::uint64_t{0});
        for (const auto& l : j.value("layers", nlohmann::json::array())) {
            PhantomLayer layer;
            if (l.contains("id") && !l.at("id").is_null())
                layer.id = boundary_from_string(l.at("id").get<std::string>());
            layer.curve = detail::curve_from_json(l.at("curve"), s.width);
            layer.intensity_above = l.at("intensity_above").get<double>();
            layer.intensity_below = l.at("intensity_below").get<double>();
            s.layers.push_back(std::move(layer));
        }
        if (j.contains("bright_band") && !j.at("bright_band").is_null()) {
            const auto& b = j.at("bright_band");
            s.bright_band = PhantomBand{detail::curve_from_json(b.at("curve"), s.width), b.at("half_width_px").get<double>(),
                                        b.at("intensity").get<double>()};
        }
        for (const auto& b : j.value("blobs", nlohmann::json::array()))
            s.blobs.push_back({b.at("center")[0].get<double>(), b.at("center")[1].get<double>(),
                               b.at("axes")[0].get<double>(), b.at("axes")[1].get<double>(),
                               b.at("intensity").get<double>()});
        for (const auto& r : j.value("shadow_runs", nlohmann::json::array()))
            s.shadow_runs.push_back({r.at("columns")[0].get<int>(), r.at("columns")[1].get<int>(), r.value("factor", 0.3)});
        validate(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidSpec)
            throw;
        throw Error(ErrorCode::InvalidSpec, e.what());
    }
}

inline nlohmann::json to_json(const PhantomTruth& t)
{
    nlohmann::json j;
    j["boundaries"] = nlohmann::json::object();
    for (const auto& [id, c] : t.boundaries)
        j["boundaries"][std::string(to_string(id))] = c;
    j["shadow_columns"] = std::vector<int>(t.shadow_columns.begin(), t.shadow_columns.end());
    j["band_curve"] = t.band_curve;
    j["fluid_areas_px"] = nlohmann::json::array();
    for (const auto& m : t.fluid_masks)
        j["fluid_areas_px"].push_back(count_set(m));
    return j;
}

} // namespace lwoct
