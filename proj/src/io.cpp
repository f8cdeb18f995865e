#include "precode/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace precode {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw std::invalid_argument("config field '" + field + "': " + why);
}

Constellation parse_constellation(const std::string& name) {
    if (name == "qpsk" || name == "4qam") return Constellation::qpsk();
    if (name == "bpsk") return Constellation::psk(2);
    if (name == "8psk") return Constellation::psk(8);
    if (name == "16qam") return Constellation::qam(4);
    if (name == "64qam") return Constellation::qam(8);
    if (name == "256qam") return Constellation::qam(16);
    bad_field("constellation", "unknown value '" + name + "'");
}

std::string constellation_name(const Constellation& c) {
    if (c.kind() == Constellation::Kind::kPsk)
        return c.order() == 2 ? "bpsk" : std::to_string(c.order()) + "psk";
    if (c.order() == 2) return "qpsk";
    return std::to_string(c.size()) + "qam";
}

std::vector<double> parse_snr_grid(const json& j) {
    std::vector<double> grid;
    if (j.is_array()) {
        for (const auto& v : j) grid.push_back(v.get<double>());
    } else if (j.is_object()) {
        double start = j.at("start").get<double>();
        double stop = j.at("stop").get<double>();
        double step = j.at("step").get<double>();
        if (step <= 0.0) bad_field("snr_db.step", "must be > 0");
        for (double s = start; s <= stop + 1e-9; s += step) grid.push_back(s);
    } else {
        grid.push_back(j.get<double>());
    }
    if (grid.empty()) bad_field("snr_db", "empty grid");
    return grid;
}

const std::set<std::string> kKnownKeys = {
    "antennas", "users", "bits", "block_len", "constellation", "criterion",
    "precoder", "snr_db", "channels", "vectors_per_channel", "seed", "gamp",
    "shaper", "roll_off", "channel_model", "num_paths", "max_delay_samples",
    "sample_rate_hz", "carrier_hz", "array_side", "spacing_over_lambda",
    "bits_list", "ratio", "min_error_count", "max_extend_factor", "workers"};

const std::set<std::string> kKnownGampKeys = {
    "mu", "theta0", "max_iters", "rel_tol", "gamma0", "anneal_rate",
    "gamma_max", "slope_mode", "ser_mode"};

} // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         ExperimentConfig::Kind kind) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");

    for (const auto& item : j.items())
        if (kKnownKeys.find(item.key()) == kKnownKeys.end())
            bad_field(item.key(), "unknown field");

    ExperimentConfig cfg;
    cfg.kind = kind;
    try {
        cfg.antennas = j.value("antennas", cfg.antennas);
        cfg.users = j.value("users", cfg.users);
        cfg.bits = j.value("bits", cfg.bits);
        cfg.block_len = j.value("block_len", cfg.block_len);
        if (j.contains("constellation"))
            cfg.constellation = parse_constellation(j["constellation"].get<std::string>());
        if (j.contains("criterion")) {
            std::string c = j["criterion"].get<std::string>();
            if (c == "mse-ace") cfg.criterion = ExperimentConfig::Crit::kMseAce;
            else if (c == "mse-no-ace") cfg.criterion = ExperimentConfig::Crit::kMseNoAce;
            else if (c == "ser") cfg.criterion = ExperimentConfig::Crit::kSer;
            else bad_field("criterion", "expected mse-ace | mse-no-ace | ser");
        }
        if (j.contains("precoder")) {
            std::string p = j["precoder"].get<std::string>();
            if (p == "gamp") cfg.precoder = ExperimentConfig::Precoder::kGamp;
            else if (p == "zf") cfg.precoder = ExperimentConfig::Precoder::kZf;
            else if (p == "ideal") cfg.precoder = ExperimentConfig::Precoder::kIdeal;
            else bad_field("precoder", "expected gamp | zf | ideal");
        }
        if (j.contains("snr_db")) cfg.snr_db = parse_snr_grid(j["snr_db"]);
        cfg.channels = j.value("channels", cfg.channels);
        cfg.vectors_per_channel = j.value("vectors_per_channel", cfg.vectors_per_channel);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("gamp")) {
            const json& g = j["gamp"];
            for (const auto& item : g.items())
                if (kKnownGampKeys.find(item.key()) == kKnownGampKeys.end())
                    bad_field("gamp." + item.key(), "unknown field");
            cfg.gamp.mu = g.value("mu", cfg.gamp.mu);
            cfg.gamp.theta0 = g.value("theta0", cfg.gamp.theta0);
            cfg.gamp.max_iters = g.value("max_iters", cfg.gamp.max_iters);
            cfg.gamp.rel_tol = g.value("rel_tol", cfg.gamp.rel_tol);
            cfg.gamp.anneal.gamma0 = g.value("gamma0", cfg.gamp.anneal.gamma0);
            cfg.gamp.anneal.rate = g.value("anneal_rate", cfg.gamp.anneal.rate);
            cfg.gamp.anneal.gamma_max = g.value("gamma_max", cfg.gamp.anneal.gamma_max);
            if (g.contains("slope_mode")) {
                std::string s = g["slope_mode"].get<std::string>();
                if (s == "gibbs") cfg.gamp.input_slope_mode = InputSlopeMode::kGibbs;
                else if (s == "inverse-magnitude")
                    cfg.gamp.input_slope_mode = InputSlopeMode::kInverseMagnitude;
                else bad_field("gamp.slope_mode", "expected gibbs | inverse-magnitude");
            }
            if (g.contains("ser_mode")) {
                std::string s = g["ser_mode"].get<std::string>();
                if (s == "newton") cfg.gamp.ser_mode = SerMode::kNewton;
                else if (s == "taylor") cfg.gamp.ser_mode = SerMode::kTaylor;
                else bad_field("gamp.ser_mode", "expected newton | taylor");
            }
        }
        if (j.contains("shaper")) {
            std::string s = j["shaper"].get<std::string>();
            if (s == "ofdm-cp") cfg.shaper_kind = Shaper::Kind::kOfdmCp;
            else if (s == "cp-sc") cfg.shaper_kind = Shaper::Kind::kCpSc;
            else if (s == "oqam-sc") cfg.shaper_kind = Shaper::Kind::kOqamSc;
            else bad_field("shaper", "expected ofdm-cp | cp-sc | oqam-sc");
        }
        cfg.roll_off = j.value("roll_off", cfg.roll_off);
        if (j.contains("channel_model")) {
            std::string s = j["channel_model"].get<std::string>();
            if (s == "iid-flat") cfg.channel_model = ExperimentConfig::ChannelModel::kIidFlat;
            else if (s == "ray-wideband")
                cfg.channel_model = ExperimentConfig::ChannelModel::kRayWideband;
            else if (s == "planar-ray")
                cfg.channel_model = ExperimentConfig::ChannelModel::kPlanarRay;
            else bad_field("channel_model", "expected iid-flat | ray-wideband | planar-ray");
        }
        cfg.num_paths = j.value("num_paths", cfg.num_paths);
        cfg.max_delay_samples = j.value("max_delay_samples", cfg.max_delay_samples);
        cfg.sample_rate_hz = j.value("sample_rate_hz", cfg.sample_rate_hz);
        cfg.carrier_hz = j.value("carrier_hz", cfg.carrier_hz);
        cfg.array_side = j.value("array_side", cfg.array_side);
        cfg.spacing_over_lambda = j.value("spacing_over_lambda", cfg.spacing_over_lambda);
        if (j.contains("bits_list")) {
            cfg.bits_list.clear();
            for (const auto& b : j["bits_list"]) {
                if (b.is_string()) {
                    if (b.get<std::string>() == "inf") cfg.bits_list.push_back(0);
                    else bad_field("bits_list", "expected integers or \"inf\"");
                } else {
                    cfg.bits_list.push_back(b.get<int>());
                }
            }
        }
        cfg.ratio = j.value("ratio", cfg.ratio);
        cfg.min_error_count = j.value("min_error_count", cfg.min_error_count);
        cfg.max_extend_factor = j.value("max_extend_factor", cfg.max_extend_factor);
        cfg.workers = j.value("workers", cfg.workers);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }

    if (cfg.antennas < 1) bad_field("antennas", "must be >= 1");
    if (cfg.users < 1) bad_field("users", "must be >= 1");
    if (cfg.bits < 1 || cfg.bits > 8) bad_field("bits", "must be in [1, 8]");
    if (cfg.channels < 1) bad_field("channels", "must be >= 1");
    if (cfg.vectors_per_channel < 1) bad_field("vectors_per_channel", "must be >= 1");
    if (cfg.snr_db.empty()) bad_field("snr_db", "must be nonempty");
    if (kind == ExperimentConfig::Kind::kBlockSweep ||
        kind == ExperimentConfig::Kind::kOtaSpectrum ||
        kind == ExperimentConfig::Kind::kTrpSpectrum) {
        if (cfg.block_len < 8 || cfg.block_len % 4 != 0 ||
            (cfg.block_len & (cfg.block_len - 1)) != 0)
            bad_field("block_len", "must be a power of two >= 8");
    }
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    switch (cfg.kind) {
        case ExperimentConfig::Kind::kFlatSweep: j["kind"] = "flat-sweep"; break;
        case ExperimentConfig::Kind::kBlockSweep: j["kind"] = "block-sweep"; break;
        case ExperimentConfig::Kind::kSevoCurve: j["kind"] = "sevo-curve"; break;
        case ExperimentConfig::Kind::kOtaSpectrum: j["kind"] = "ota-spectrum"; break;
        case ExperimentConfig::Kind::kTrpSpectrum: j["kind"] = "trp-spectrum"; break;
    }
    j["antennas"] = cfg.antennas;
    j["users"] = cfg.users;
    j["bits"] = cfg.bits;
    j["block_len"] = cfg.block_len;
    j["constellation"] = constellation_name(cfg.constellation);
    j["criterion"] = cfg.criterion == ExperimentConfig::Crit::kMseAce ? "mse-ace"
                     : cfg.criterion == ExperimentConfig::Crit::kMseNoAce ? "mse-no-ace"
                                                                          : "ser";
    j["precoder"] = cfg.precoder == ExperimentConfig::Precoder::kGamp ? "gamp"
                    : cfg.precoder == ExperimentConfig::Precoder::kZf ? "zf"
                                                                      : "ideal";
    j["snr_db"] = cfg.snr_db;
    j["channels"] = cfg.channels;
    j["vectors_per_channel"] = cfg.vectors_per_channel;
    j["seed"] = cfg.seed;
    j["gamp"] = {{"mu", cfg.gamp.mu},
                 {"theta0", cfg.gamp.theta0},
                 {"max_iters", cfg.gamp.max_iters},
                 {"rel_tol", cfg.gamp.rel_tol},
                 {"gamma0", cfg.gamp.anneal.gamma0},
                 {"anneal_rate", cfg.gamp.anneal.rate},
                 {"gamma_max", cfg.gamp.anneal.gamma_max},
                 {"slope_mode", cfg.gamp.input_slope_mode == InputSlopeMode::kGibbs
                                    ? "gibbs"
                                    : "inverse-magnitude"},
                 {"ser_mode", cfg.gamp.ser_mode == SerMode::kNewton ? "newton" : "taylor"}};
    j["shaper"] = cfg.shaper_kind == Shaper::Kind::kOfdmCp ? "ofdm-cp"
                  : cfg.shaper_kind == Shaper::Kind::kCpSc ? "cp-sc"
                                                           : "oqam-sc";
    j["roll_off"] = cfg.roll_off;
    j["channel_model"] =
        cfg.channel_model == ExperimentConfig::ChannelModel::kIidFlat ? "iid-flat"
        : cfg.channel_model == ExperimentConfig::ChannelModel::kRayWideband ? "ray-wideband"
                                                                            : "planar-ray";
    j["num_paths"] = cfg.num_paths;
    j["max_delay_samples"] = cfg.max_delay_samples;
    j["sample_rate_hz"] = cfg.sample_rate_hz;
    j["carrier_hz"] = cfg.carrier_hz;
    j["array_side"] = cfg.array_side;
    j["spacing_over_lambda"] = cfg.spacing_over_lambda;
    j["bits_list"] = cfg.bits_list;
    j["ratio"] = cfg.ratio;
    j["min_error_count"] = cfg.min_error_count;
    j["max_extend_factor"] = cfg.max_extend_factor;
    j["workers"] = cfg.workers;
    return j.dump(2);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary); // '\n' line ends on every platform
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    char buf[40];
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", row[i]);
            out << buf << (i + 1 < row.size() ? "," : "\n");
        }
    }
}

void write_meta(const std::string& path, const ExperimentConfig& config,
                double runtime_seconds, const std::string& extra_json) {
    json j;
    j["config"] = json::parse(config_to_json(config));
    j["seed"] = config.seed;
    j["version"] = "precode 0.1.0";
    j["runtime_seconds"] = runtime_seconds;
    if (!extra_json.empty()) j["result"] = json::parse(extra_json);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

namespace {

double nice_tick(double span) {
    double raw = span / 6.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double r = raw / mag;
    double step = (r < 1.5) ? 1.0 : (r < 3.5) ? 2.0 : (r < 7.5) ? 5.0 : 10.0;
    return step * mag;
}

} // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series, bool log_y) {
    const double width = 720, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 55;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (!std::isfinite(y)) continue;
            if (log_y && y <= 0.0) continue;
            double yy = log_y ? std::log10(y) : y;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, yy);
            ymax = std::max(ymax, yy);
        }
    if (!(xmax > xmin)) { xmin -= 1; xmax += 1; }
    if (!(ymax > ymin)) { ymin -= 1; ymax += 1; }
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) {
        double yy = log_y ? std::log10(y) : y;
        return height - mb - (yy - ymin) / (ymax - ymin) * (height - mt - mb);
    };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << height << "' viewBox='0 0 " << width << " " << height << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << width / 2 << "' y='22' text-anchor='middle' font-size='15'>"
        << title << "</text>\n";

    // axes and ticks
    out << "<rect x='" << ml << "' y='" << mt << "' width='" << width - ml - mr
        << "' height='" << height - mt - mb << "' fill='none' stroke='black'/>\n";
    double xt = nice_tick(xmax - xmin);
    for (double x = std::ceil(xmin / xt) * xt; x <= xmax + 1e-12; x += xt) {
        out << "<line x1='" << px(x) << "' y1='" << height - mb << "' x2='" << px(x)
            << "' y2='" << height - mb + 5 << "' stroke='black'/>\n"
            << "<text x='" << px(x) << "' y='" << height - mb + 18
            << "' text-anchor='middle' font-size='11'>" << x << "</text>\n";
    }
    if (log_y) {
        for (int e = static_cast<int>(std::floor(ymin)); e <= std::ceil(ymax); ++e) {
            double y = std::pow(10.0, e);
            if (std::log10(y) < ymin || std::log10(y) > ymax) continue;
            out << "<line x1='" << ml - 5 << "' y1='" << py(y) << "' x2='" << ml << "' y2='"
                << py(y) << "' stroke='black'/>\n"
                << "<text x='" << ml - 8 << "' y='" << py(y) + 4
                << "' text-anchor='end' font-size='11'>1e" << e << "</text>\n";
        }
    } else {
        double yt = nice_tick(ymax - ymin);
        for (double y = std::ceil(ymin / yt) * yt; y <= ymax + 1e-12; y += yt) {
            double yv = y;
            out << "<line x1='" << ml - 5 << "' y1='" << py(yv) << "' x2='" << ml << "' y2='"
                << py(yv) << "' stroke='black'/>\n"
                << "<text x='" << ml - 8 << "' y='" << py(yv) + 4
                << "' text-anchor='end' font-size='11'>" << yv << "</text>\n";
        }
    }
    out << "<text x='" << width / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n"
        << "<text x='18' y='" << height / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 " << height / 2
        << ")'>" << y_label << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        out << "<polyline fill='none' stroke='" << colors[si % 8]
            << "' stroke-width='1.6' points='";
        for (size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (!std::isfinite(y) || (log_y && y <= 0.0)) continue;
            out << px(s.x[i]) << "," << py(y) << " ";
        }
        out << "'/>\n";
        out << "<text x='" << width - mr - 8 << "' y='" << mt + 18 + 16 * si
            << "' text-anchor='end' font-size='12' fill='" << colors[si % 8] << "'>"
            << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace precode
