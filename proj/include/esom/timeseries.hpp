#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "esom/errors.hpp"

namespace esom {

// Hourly load and per-resource capacity-factor series over the planning
// horizon. Immutable after construction; safe to share across workers.
struct HorizonData {
    std::size_t hours = 0;
    std::vector<double> load;                             // MWh per hour, >= 0
    std::map<std::string, std::vector<double>> profiles;  // capacity factors in [0,1]
    std::string start_timestamp = "2015-01-05T00:00:00Z"; // informational anchor

    void validate() const;

    bool operator==(const HorizonData&) const = default;
};

// Contiguous block of hours standing in for one aggregation unit.
struct TimeSlice {
    std::size_t index = 0;
    std::size_t offset = 0;
    std::size_t length = 168;
};

// View of one slice's raw series (load + per-resource profile segments).
struct SliceView {
    std::vector<double> load;
    std::map<std::string, std::vector<double>> profiles;
};

struct SynthConfig {
    double years = 1.0;           // horizon length; hours = round(years * 8760)
    std::size_t weeks = 0;        // if nonzero, overrides years: hours = weeks * 168
    double base_load = 1000.0;    // MWh mean demand
    double load_diurnal_amp = 0.3;
    double load_seasonal_amp = 0.2;
    double wind_seasonal_amp = 0.25;
    double wind_synoptic_amp = 0.35;  // multi-day weather-system oscillation
    double yearly_amp = 0.05;         // slow year-over-year drift
    double noise = 0.25;              // 0 disables all stochastic structure
    double solar_peak = 0.85;         // clear-sky noon capacity factor

    std::size_t horizon_hours() const;
    void validate() const;
};

HorizonData load_csv(const std::string& path);
void write_csv(const HorizonData& data, const std::string& path);

// Deterministic synthetic generator standing in for measured data.
// Solar: diurnal bell, zero at night, seasonally modulated cloud losses.
// Wind: seasonal + synoptic oscillation + AR(1) noise. Load: diurnal + seasonal.
HorizonData synthesize(const SynthConfig& config, std::uint64_t seed);

struct SliceResult {
    std::vector<TimeSlice> slices;
    std::size_t dropped_hours = 0;  // trailing remainder shorter than slice_length
};

SliceResult slice(const HorizonData& data, std::size_t slice_length);

SliceView slice_view(const HorizonData& data, const TimeSlice& s);

}  // namespace esom
