#include "dmtz/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dmtz/error.hpp"

namespace dmtz {

namespace {

struct Uniform {
    std::mt19937_64 rng;
    double operator()() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
    double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }
};

}  // namespace

const char* to_string(Family f) {
    switch (f) {
        case Family::ramp: return "ramp";
        case Family::gaussian: return "gaussian";
        case Family::noise: return "noise";
    }
    return "?";
}

std::optional<Family> parse_family(std::string_view s) {
    for (const Family f : {Family::ramp, Family::gaussian, Family::noise})
        if (s == to_string(f)) return f;
    return std::nullopt;
}

ScalarField generate(const GenConfig& cfg) {
    validate_dims(cfg.dims);
    const GridDims& d = cfg.dims;
    Uniform u{std::mt19937_64(cfg.seed)};
    ScalarField out{d, std::vector<double>(static_cast<std::size_t>(d.vertex_count()), 0.0)};
    auto each = [&](auto&& fn) {
        std::size_t i = 0;
        for (std::int64_t z = 0; z < d.nz; ++z)
            for (std::int64_t y = 0; y < d.ny; ++y)
                for (std::int64_t x = 0; x < d.nx; ++x) out.values[i++] = fn(double(x), double(y), double(z));
    };
    switch (cfg.family) {
        case Family::ramp: {
            const double a = u(0.5, 1.5), b = u(0.5, 1.5), c = u(0.5, 1.5);
            each([&](double x, double y, double z) { return a * x + b * y + c * z; });
            break;
        }
        case Family::gaussian: {
            if (cfg.peaks < 1) fail(Errc::invalid_argument, "gaussian family needs at least one peak");
            struct Peak {
                std::int64_t x, y, z;
                double amp;
            };
            std::vector<Peak> peaks;
            int attempts = 0;
            while (static_cast<int>(peaks.size()) < cfg.peaks) {
                if (++attempts > 100000) fail(Errc::invalid_argument, "grid too small for the requested peaks");
                auto pick = [&](std::int64_t n) { return static_cast<std::int64_t>(u() * static_cast<double>(n)); };
                const Peak p{pick(d.nx), pick(d.ny), d.is_3d() ? pick(d.nz) : 0, u(0.5, 1.0)};
                const bool clear = std::all_of(peaks.begin(), peaks.end(), [&](const Peak& q) {
                    return std::max({std::abs(p.x - q.x), std::abs(p.y - q.y), std::abs(p.z - q.z)}) >= 3;
                });
                if (clear) peaks.push_back(p);
            }
            each([&](double x, double y, double z) {
                double s = 0;
                for (const auto& p : peaks) {
                    const double dx = x - double(p.x), dy = y - double(p.y), dz = z - double(p.z);
                    s += p.amp * std::exp(-(dx * dx + dy * dy + dz * dz) / 2);
                }
                return s;
            });
            break;
        }
        case Family::noise: {
            struct Wave {
                double kx, ky, kz, phase, amp;
            };
            std::vector<Wave> waves;
            for (int m = 0; m < 8; ++m) {
                const double len = u(4.0, 16.0);
                const double theta = u(0, 2 * std::numbers::pi);
                const double phi = d.is_3d() ? std::acos(u(-1.0, 1.0)) : std::numbers::pi / 2;
                const double k = 2 * std::numbers::pi / len;
                waves.push_back({k * std::sin(phi) * std::cos(theta), k * std::sin(phi) * std::sin(theta),
                                 k * std::cos(phi), u(0, 2 * std::numbers::pi), u(0.2, 1.0)});
            }
            each([&](double x, double y, double z) {
                double s = 0;
                for (const auto& w : waves) s += w.amp * std::sin(w.kx * x + w.ky * y + w.kz * z + w.phase);
                return s;
            });
            break;
        }
    }
    if (cfg.jitter > 0)
        for (auto& v : out.values) v += cfg.jitter * u(-1.0, 1.0);
    return out;
}

}  // namespace dmtz
