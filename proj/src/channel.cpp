#include "precode/channel.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace precode {

using nlohmann::json;

FlatChannel draw_iid_flat(int users, int antennas, RngStream& rng) {
    if (users < 1 || antennas < 1)
        throw std::invalid_argument("draw_iid_flat: dimensions must be >= 1");
    FlatChannel ch;
    ch.h.resize(users, antennas);
    const double var = 1.0 / antennas;
    for (int k = 0; k < users; ++k)
        for (int n = 0; n < antennas; ++n) ch.h(k, n) = rng.next_cnormal(var);
    return ch;
}

CVec ula_response(int tone, double aod_rad, int antennas, int dft_length,
                  double sample_interval, double carrier_hz) {
    if (tone < -dft_length / 2 || tone >= dft_length / 2)
        throw std::invalid_argument("ula_response: tone index out of range");
    // "T Ts" in the frequency offset is read as the block duration M * Ts.
    const double offset = tone / (dft_length * sample_interval * carrier_hz) + 1.0;
    CVec a(antennas);
    const double base = -kPi * std::cos(aod_rad) * offset;
    for (int n = 0; n < antennas; ++n) a(n) = {std::cos(base * n), std::sin(base * n)};
    return a;
}

WidebandChannel draw_ray_channel(const RayParams& params, int antennas, int dft_length,
                                 double sample_interval, double carrier_hz) {
    const int users = static_cast<int>(params.per_user.size());
    if (users < 1) throw std::invalid_argument("draw_ray_channel: no users");
    for (const auto& rays : params.per_user)
        if (rays.empty()) throw std::invalid_argument("draw_ray_channel: user with no paths");

    WidebandChannel ch;
    ch.sample_interval = sample_interval;
    ch.carrier_hz = carrier_hz;
    ch.per_tone.resize(static_cast<size_t>(dft_length));
    for (int i = 0; i < dft_length; ++i) {
        const int m = i - dft_length / 2;
        CMat h = CMat::Zero(users, antennas);
        for (int k = 0; k < users; ++k) {
            for (const Ray& ray : params.per_user[static_cast<size_t>(k)]) {
                CVec a = ula_response(m, ray.aod_rad, antennas, dft_length,
                                      sample_interval, carrier_hz);
                double ph = -2.0 * kPi * m * ray.delay_s / (dft_length * sample_interval);
                cplx rot = ray.gain * cplx{std::cos(ph), std::sin(ph)};
                h.row(k) += rot * a.transpose();
            }
        }
        ch.per_tone[static_cast<size_t>(i)] = std::move(h);
    }
    return ch;
}

RayParams draw_ray_params(int users, int num_paths, double max_delay_samples,
                          double sample_interval, RngStream& rng) {
    RayParams p;
    p.per_user.resize(static_cast<size_t>(users));
    for (int k = 0; k < users; ++k) {
        auto& rays = p.per_user[static_cast<size_t>(k)];
        rays.resize(static_cast<size_t>(num_paths));
        for (int l = 0; l < num_paths; ++l) {
            rays[static_cast<size_t>(l)].gain = rng.next_cnormal(1.0 / num_paths);
            rays[static_cast<size_t>(l)].aod_rad = rng.next_uniform() * kPi;
            rays[static_cast<size_t>(l)].delay_s =
                rng.next_uniform() * max_delay_samples * sample_interval;
        }
    }
    return p;
}

WidebandChannel block_fading_from_flat(const FlatChannel& flat, int dft_length) {
    WidebandChannel ch;
    ch.per_tone.assign(static_cast<size_t>(dft_length), flat.h);
    return ch;
}

FlatChannel draw_planar_ray_flat(int users, int side, double spacing_over_lambda,
                                 int num_paths, RngStream& rng) {
    const int antennas = side * side;
    FlatChannel ch;
    ch.h = CMat::Zero(users, antennas);
    for (int k = 0; k < users; ++k) {
        for (int l = 0; l < num_paths; ++l) {
            // direction uniform over the upper hemisphere
            double cos_th = rng.next_uniform();
            double sin_th = std::sqrt(std::max(0.0, 1.0 - cos_th * cos_th));
            double az = 2.0 * kPi * rng.next_uniform();
            double ux = sin_th * std::cos(az);
            double uy = sin_th * std::sin(az);
            cplx gain = rng.next_cnormal(1.0 / num_paths);
            for (int r = 0; r < side; ++r) {
                for (int c = 0; c < side; ++c) {
                    double ph = -2.0 * kPi * spacing_over_lambda * (r * ux + c * uy);
                    ch.h(k, r * side + c) += gain * cplx{std::cos(ph), std::sin(ph)};
                }
            }
        }
    }
    // normalize to E|h|^2 = 1/N like the IID model
    ch.h *= 1.0 / std::sqrt(static_cast<double>(antennas));
    return ch;
}

static json entries_to_json(const CMat& m) {
    json data = json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) {
            data.push_back(m(r, c).real());
            data.push_back(m(r, c).imag());
        }
    return data;
}

static CMat entries_from_json(const json& data, int rows, int cols) {
    CMat m(rows, cols);
    size_t i = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double re = data.at(i++);
            double im = data.at(i++);
            m(r, c) = {re, im};
        }
    return m;
}

std::string channel_to_json(const WidebandChannel& ch) {
    json j;
    j["type"] = "wideband";
    j["users"] = ch.users();
    j["antennas"] = ch.antennas();
    j["dft_length"] = ch.dft_length();
    j["tone_order"] = "centered";
    j["sample_interval"] = ch.sample_interval;
    j["carrier_hz"] = ch.carrier_hz;
    json tones = json::array();
    for (const CMat& h : ch.per_tone) tones.push_back(entries_to_json(h));
    j["tones"] = tones;
    return j.dump();
}

WidebandChannel channel_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("type") != "wideband")
        throw std::invalid_argument("channel_from_json: not a wideband container");
    WidebandChannel ch;
    ch.sample_interval = j.value("sample_interval", 0.0);
    ch.carrier_hz = j.value("carrier_hz", 0.0);
    int users = j.at("users");
    int antennas = j.at("antennas");
    int m = j.at("dft_length");
    const json& tones = j.at("tones");
    if (static_cast<int>(tones.size()) != m)
        throw std::invalid_argument("channel_from_json: tone count mismatch");
    ch.per_tone.reserve(static_cast<size_t>(m));
    for (const json& t : tones) ch.per_tone.push_back(entries_from_json(t, users, antennas));
    return ch;
}

std::string channel_to_json(const FlatChannel& ch) {
    json j;
    j["type"] = "flat";
    j["users"] = ch.users();
    j["antennas"] = ch.antennas();
    j["entries"] = entries_to_json(ch.h);
    return j.dump();
}

FlatChannel flat_channel_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("type") != "flat")
        throw std::invalid_argument("flat_channel_from_json: not a flat container");
    FlatChannel ch;
    ch.h = entries_from_json(j.at("entries"), j.at("users"), j.at("antennas"));
    return ch;
}

} // namespace precode
