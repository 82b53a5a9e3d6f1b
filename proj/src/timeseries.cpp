#include "esom/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "esom/rng.hpp"

namespace esom {

namespace {

constexpr double kPi = std::numbers::pi;

// Strict "YYYY-MM-DDTHH:MM:SSZ" parse to an hour count since a fixed epoch.
// Only uniformity between consecutive rows matters, so days-since-civil is enough.
long long parse_iso_hour(const std::string& ts, std::size_t row) {
    int y, mo, d, h, mi, s;
    char tz;
    if (std::sscanf(ts.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &tz) != 7 || tz != 'Z')
        throw ValidationError("row " + std::to_string(row) + ": timestamp '" + ts +
                              "' is not ISO-8601 UTC (YYYY-MM-DDTHH:MM:SSZ)");
    if (mi != 0 || s != 0)
        throw ValidationError("row " + std::to_string(row) + ": timestamp '" + ts +
                              "' is not on the hour");
    // Howard Hinnant's days-from-civil.
    long long yy = y - (mo <= 2);
    long long era = (yy >= 0 ? yy : yy - 399) / 400;
    unsigned yoe = static_cast<unsigned>(yy - era * 400);
    unsigned doy = (153u * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    long long days = era * 146097 + static_cast<long long>(doe) - 719468;
    return days * 24 + h;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& tok, std::size_t row, const std::string& col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("row " + std::to_string(row) + ", column '" + col +
                              "': cannot parse '" + tok + "' as a number");
    }
}

}  // namespace

void HorizonData::validate() const {
    if (load.size() != hours)
        throw ValidationError("load series has " + std::to_string(load.size()) +
                              " entries, expected " + std::to_string(hours));
    for (std::size_t t = 0; t < hours; ++t)
        if (!(load[t] >= 0.0) || !std::isfinite(load[t]))
            throw ValidationError("row " + std::to_string(t + 1) + ": negative or non-finite load " +
                                  std::to_string(load[t]));
    for (const auto& [id, series] : profiles) {
        if (series.size() != hours)
            throw ValidationError("profile '" + id + "' has " + std::to_string(series.size()) +
                                  " entries, expected " + std::to_string(hours));
        for (std::size_t t = 0; t < hours; ++t)
            if (!(series[t] >= 0.0 && series[t] <= 1.0))
                throw ValidationError("row " + std::to_string(t + 1) + ": profile '" + id +
                                      "' value " + std::to_string(series[t]) + " outside [0,1]");
    }
}

HorizonData load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string header;
    if (!std::getline(in, header)) throw SchemaError("'" + path + "' is empty");
    auto cols = split_csv_line(header);
    if (cols.size() < 2 || cols[0] != "timestamp" || cols[1] != "load")
        throw SchemaError("'" + path + "': header must start with 'timestamp,load', got '" + header + "'");
    std::vector<std::string> resources(cols.begin() + 2, cols.end());
    for (const auto& r : resources)
        if (r.empty()) throw SchemaError("'" + path + "': empty resource column name in header");

    HorizonData data;
    for (const auto& r : resources) data.profiles[r] = {};

    std::string line;
    std::size_t row = 1;  // 1-based data rows, header is row 0
    long long prev_hour = 0;
    bool have_prev = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto toks = split_csv_line(line);
        if (toks.size() != cols.size())
            throw SchemaError("row " + std::to_string(row) + ": expected " + std::to_string(cols.size()) +
                              " fields, got " + std::to_string(toks.size()));
        long long hour = parse_iso_hour(toks[0], row);
        if (have_prev && hour != prev_hour + 1)
            throw ValidationError("row " + std::to_string(row) + ": timestamp gap, '" + toks[0] +
                                  "' is not one hour after the previous row");
        if (!have_prev) data.start_timestamp = toks[0];
        prev_hour = hour;
        have_prev = true;

        double load = parse_number(toks[1], row, "load");
        if (load < 0.0)
            throw ValidationError("row " + std::to_string(row) + ": negative load " + std::to_string(load));
        data.load.push_back(load);
        for (std::size_t i = 0; i < resources.size(); ++i) {
            double v = parse_number(toks[2 + i], row, resources[i]);
            if (v < 0.0 || v > 1.0)
                throw ValidationError("row " + std::to_string(row) + ": profile '" + resources[i] +
                                      "' value " + std::to_string(v) + " outside [0,1]");
            data.profiles[resources[i]].push_back(v);
        }
        ++row;
    }
    data.hours = data.load.size();
    if (data.hours == 0) throw SchemaError("'" + path + "' contains no data rows");
    data.validate();
    return data;
}

void write_csv(const HorizonData& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "timestamp,load";
    for (const auto& [id, _] : data.profiles) out << ',' << id;
    out << '\n';

    long long base = parse_iso_hour(data.start_timestamp, 0);
    char buf[64];
    for (std::size_t t = 0; t < data.hours; ++t) {
        long long ht = base + static_cast<long long>(t);
        long long days = ht / 24;
        int hour = static_cast<int>(ht % 24);
        // civil-from-days, inverse of the parse above
        long long z = days + 719468;
        long long era = (z >= 0 ? z : z - 146096) / 146097;
        unsigned doe = static_cast<unsigned>(z - era * 146097);
        unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        long long y = static_cast<long long>(yoe) + era * 400;
        unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        unsigned mp = (5 * doy + 2) / 153;
        unsigned d = doy - (153 * mp + 2) / 5 + 1;
        unsigned m = mp + (mp < 10 ? 3 : -9);
        y += (m <= 2);
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:00:00Z", y, m, d, hour);
        out << buf;
        std::snprintf(buf, sizeof buf, "%.10g", data.load[t]);
        out << ',' << buf;
        for (const auto& [_, series] : data.profiles) {
            std::snprintf(buf, sizeof buf, "%.10g", series[t]);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::size_t SynthConfig::horizon_hours() const {
    if (weeks > 0) return weeks * 168;
    return static_cast<std::size_t>(std::llround(years * 8760.0));
}

void SynthConfig::validate() const {
    if (weeks == 0 && !(years > 0.0))
        throw ConfigError("synthesis horizon must be positive (years=" + std::to_string(years) + ")");
    if (base_load < 0.0) throw ConfigError("base_load must be >= 0");
    for (double a : {load_diurnal_amp, load_seasonal_amp, wind_seasonal_amp, wind_synoptic_amp,
                     yearly_amp, noise, solar_peak})
        if (a < 0.0) throw ConfigError("synthesis amplitudes must be >= 0");
    if (horizon_hours() == 0) throw ConfigError("synthesis horizon rounds to zero hours");
}

HorizonData synthesize(const SynthConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t hours = config.horizon_hours();

    HorizonData data;
    data.hours = hours;
    data.load.resize(hours);
    auto& solar = data.profiles["solar"];
    auto& wind = data.profiles["wind"];
    solar.resize(hours);
    wind.resize(hours);

    Rng rng(seed);
    auto gauss = [&rng]() { return rng.gaussian(); };
    auto clip01 = [](double v) { return std::clamp(v, 0.0, 1.0); };

    // AR(1) weather states. All randomness flows through these two processes
    // so that noise = 0 yields fully deterministic, diurnally periodic series.
    double cloud = 0.5, gust = 0.0;
    const double cloud_rho = 0.995;   // ~multi-day persistence
    const double gust_rho = 0.97;

    for (std::size_t t = 0; t < hours; ++t) {
        double hod = static_cast<double>(t % 24);
        double season = std::sin(2.0 * kPi * (static_cast<double>(t) / 8760.0 - 0.22));
        double yearly = std::sin(2.0 * kPi * static_cast<double>(t) / (7.0 * 8760.0));
        double synoptic = std::sin(2.0 * kPi * static_cast<double>(t) / 301.0) +
                          0.6 * std::sin(2.0 * kPi * static_cast<double>(t) / 1181.0);

        cloud = cloud_rho * cloud + (1.0 - cloud_rho) * (0.5 - 0.25 * season) +
                0.05 * gauss();
        cloud = std::clamp(cloud, 0.0, 1.0);
        gust = gust_rho * gust + 0.12 * gauss();

        // Solar: sin^2 bell between 06:00 and 18:00, zero at night.
        double bell = 0.0;
        if (hod >= 6.0 && hod < 18.0) {
            double x = (hod - 6.0) / 12.0;
            double s = std::sin(kPi * x);
            bell = config.solar_peak * s * s;
        }
        solar[t] = clip01(bell * (1.0 - config.noise * cloud));

        double w = 0.38 + config.wind_seasonal_amp * season * 0.5 +
                   config.wind_synoptic_amp * 0.3 * synoptic +
                   config.yearly_amp * yearly +
                   config.noise * (0.45 * gust);
        wind[t] = clip01(w);

        double diurnal = std::sin(2.0 * kPi * (hod - 9.0) / 24.0);
        double l = config.base_load *
                   (1.0 + config.load_diurnal_amp * diurnal + config.load_seasonal_amp * (-season) * 0.5 +
                    config.yearly_amp * yearly) *
                   (1.0 + config.noise * 0.02 * gauss());
        data.load[t] = std::max(0.0, l);
    }
    data.validate();
    return data;
}

SliceResult slice(const HorizonData& data, std::size_t slice_length) {
    if (slice_length < 1) throw ConfigError("slice_length must be >= 1");
    if (slice_length > data.hours)
        throw ConfigError("slice_length " + std::to_string(slice_length) + " exceeds horizon of " +
                          std::to_string(data.hours) + " hours; no slices");
    SliceResult out;
    std::size_t count = data.hours / slice_length;
    out.slices.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        out.slices.push_back(TimeSlice{k, k * slice_length, slice_length});
    out.dropped_hours = data.hours - count * slice_length;
    return out;
}

SliceView slice_view(const HorizonData& data, const TimeSlice& s) {
    if (s.offset + s.length > data.hours)
        throw ConfigError("slice [" + std::to_string(s.offset) + ", " +
                          std::to_string(s.offset + s.length) + ") exceeds horizon");
    SliceView v;
    v.load.assign(data.load.begin() + s.offset, data.load.begin() + s.offset + s.length);
    for (const auto& [id, series] : data.profiles)
        v.profiles[id].assign(series.begin() + s.offset, series.begin() + s.offset + s.length);
    return v;
}

}  // namespace esom
