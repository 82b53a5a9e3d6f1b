#include "esom/catalog.hpp"

#include <fstream>

#include <json.hpp>

namespace esom {

using nlohmann::json;

void TechCatalog::validate() const {
    for (const auto& t : ire_techs) {
        if (t.id.empty()) throw ConfigError("IRE tech with empty id");
        if (t.c_inv < 0.0) throw ConfigError("IRE '" + t.id + "': negative investment cost");
    }
    for (const auto& t : storage_techs) {
        if (t.id.empty()) throw ConfigError("storage tech with empty id");
        if (t.c_inv_ene < 0.0 || t.c_inv_pow < 0.0 || t.c_deg < 0.0)
            throw ConfigError("storage '" + t.id + "': negative cost");
        if (!(t.eta > 0.0 && t.eta <= 1.0))
            throw ConfigError("storage '" + t.id + "': eta must be in (0,1], got " + std::to_string(t.eta));
    }
    for (const auto& t : thermal_techs) {
        if (t.id.empty()) throw ConfigError("thermal tech with empty id");
        if (t.c_inv < 0.0 || t.c_op < 0.0 || t.c_updn < 0.0)
            throw ConfigError("thermal '" + t.id + "': negative cost");
        if (!(0.0 <= t.xi_min && t.xi_min <= t.xi_max && t.xi_max <= 1.0))
            throw ConfigError("thermal '" + t.id + "': need 0 <= xi_min <= xi_max <= 1");
        if (t.tau_up < 0 || t.tau_dn < 0)
            throw ConfigError("thermal '" + t.id + "': negative min up/down time");
        if (t.n_total < 0) throw ConfigError("thermal '" + t.id + "': negative unit count");
        if (t.unit_size <= 0.0) throw ConfigError("thermal '" + t.id + "': unit_size must be positive");
    }
}

void Policy::validate() const {
    if (!(rps >= 0.0 && rps <= 1.0))
        throw ConfigError("rps must be in [0,1], got " + std::to_string(rps));
}

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    return j;
}

double need(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key)) throw ConfigError(ctx + ": missing field '" + key + "'");
    if (!j[key].is_number()) throw ConfigError(ctx + ": field '" + key + "' must be a number");
    return j[key].get<double>();
}

}  // namespace

TechCatalog load_catalog(const std::string& path) {
    json j = read_json_file(path);
    TechCatalog cat;
    for (const auto& t : j.value("ire", json::array())) {
        IreTech ire;
        ire.id = t.value("id", "");
        ire.c_inv = need(t, "capex_per_kw", "ire '" + ire.id + "'") * 1000.0;  // $/kW -> $/MW
        cat.ire_techs.push_back(ire);
    }
    for (const auto& t : j.value("storage", json::array())) {
        StorageTech s;
        s.id = t.value("id", "");
        std::string ctx = "storage '" + s.id + "'";
        s.c_inv_ene = need(t, "energy_capex_per_kwh", ctx) * 1000.0;  // $/kWh -> $/MWh
        s.c_inv_pow = need(t, "power_capex_per_kw", ctx) * 1000.0;
        s.c_deg = need(t, "opex_per_mwh", ctx);
        s.eta = t.value("eta", 1.0);
        cat.storage_techs.push_back(s);
    }
    for (const auto& t : j.value("thermal", json::array())) {
        ThermalTech th;
        th.id = t.value("id", "");
        std::string ctx = "thermal '" + th.id + "'";
        th.c_inv = need(t, "capex_per_kw", ctx) * 1000.0;
        th.c_op = need(t, "opex_per_mwh", ctx);
        th.c_updn = t.value("updn_cost", 0.0);
        th.xi_min = t.value("xi_min", 0.0);
        th.xi_max = t.value("xi_max", 1.0);
        th.tau_up = t.value("up_time", 0);
        th.tau_dn = t.value("down_time", 0);
        th.n_total = t.value("units", 0);
        th.unit_size = t.value("unit_size_mw", 0.0);
        th.expandable = t.value("expandable", false);
        cat.thermal_techs.push_back(th);
    }
    cat.validate();
    return cat;
}

Policy load_policy(const std::string& path) {
    json j = read_json_file(path);
    Policy p;
    if (j.contains("policy")) {
        p.rps = j["policy"].value("rps", 0.0);
        p.rps_in_slices = j["policy"].value("rps_in_slices", true);
    }
    p.validate();
    return p;
}

void save_catalog(const TechCatalog& catalog, const Policy& policy, const std::string& path) {
    json j;
    for (const auto& t : catalog.ire_techs)
        j["ire"].push_back({{"id", t.id}, {"capex_per_kw", t.c_inv / 1000.0}});
    for (const auto& t : catalog.storage_techs)
        j["storage"].push_back({{"id", t.id},
                                {"energy_capex_per_kwh", t.c_inv_ene / 1000.0},
                                {"power_capex_per_kw", t.c_inv_pow / 1000.0},
                                {"opex_per_mwh", t.c_deg},
                                {"eta", t.eta}});
    for (const auto& t : catalog.thermal_techs)
        j["thermal"].push_back({{"id", t.id},
                                {"capex_per_kw", t.c_inv / 1000.0},
                                {"opex_per_mwh", t.c_op},
                                {"updn_cost", t.c_updn},
                                {"xi_min", t.xi_min},
                                {"xi_max", t.xi_max},
                                {"up_time", t.tau_up},
                                {"down_time", t.tau_dn},
                                {"units", t.n_total},
                                {"unit_size_mw", t.unit_size},
                                {"expandable", t.expandable}});
    j["policy"] = {{"rps", policy.rps}, {"rps_in_slices", policy.rps_in_slices}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace esom
