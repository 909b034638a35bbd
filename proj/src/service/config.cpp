#include "captchastar/service/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace captchastar::service {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* name) {
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field '") + name + "' has the wrong type");
    }
}

void apply_defaults(const json& j, GenParams& p) {
    if (!j.is_object()) {
        throw ConfigError("config field 'defaults' must be an object");
    }
    for (const auto& [k, v] : j.items()) {
        if (k == "psi") {
            p.psi = field<double>(j, "psi");
        } else if (k == "delta") {
            p.delta = field<double>(j, "delta");
        } else if (k == "nsol") {
            p.nsol = field<int>(j, "nsol");
        } else if (k == "pic_size") {
            p.pic_size = field<int>(j, "pic_size");
        } else if (k == "rotation") {
            p.rotation = field<bool>(j, "rotation");
        } else if (k == "tolerance") {
            p.tolerance = field<double>(j, "tolerance");
        } else if (k == "solution_policy") {
            p.solution_policy = parse_solution_policy(field<std::string>(j, "solution_policy"));
        } else {
            throw ConfigError("unknown defaults key '" + k + "'");
        }
    }
}

void apply_overrides(const json& j, OverridePolicy& o) {
    if (!j.is_object()) {
        throw ConfigError("config field 'overrides' must be an object");
    }
    for (const auto& [k, v] : j.items()) {
        if (k == "allow") {
            o.allow = field<bool>(j, "allow");
        } else if (k == "max_nsol") {
            o.max_nsol = field<int>(j, "max_nsol");
        } else if (k == "max_psi") {
            o.max_psi = field<double>(j, "max_psi");
        } else if (k == "max_delta") {
            o.max_delta = field<double>(j, "max_delta");
        } else {
            throw ConfigError("unknown overrides key '" + k + "'");
        }
    }
}

int to_int(const std::string& name, const std::string& v) {
    try {
        std::size_t used = 0;
        const int out = std::stoi(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return out;
    } catch (const std::logic_error&) {
        throw ConfigError(name + " must be an integer");
    }
}

double to_double(const std::string& name, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return out;
    } catch (const std::logic_error&) {
        throw ConfigError(name + " must be a number");
    }
}

bool to_bool(const std::string& name, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "0" || v == "false" || v == "no" || v == "off") {
        return false;
    }
    throw ConfigError(name + " must be a boolean");
}

}  // namespace

ServiceConfig parse_config(const std::string& json_text, ServiceConfig c) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "pool_dir") {
                c.pool_dir = field<std::string>(j, "pool_dir");
            } else if (k == "host") {
                c.host = field<std::string>(j, "host");
            } else if (k == "port") {
                c.port = field<int>(j, "port");
            } else if (k == "ttl_seconds") {
                c.ttl_seconds = field<int>(j, "ttl_seconds");
            } else if (k == "encoding") {
                c.encoding = wire::parse_encoding(field<std::string>(j, "encoding"));
            } else if (k == "static_dir") {
                c.static_dir = field<std::string>(j, "static_dir");
            } else if (k == "rate_limit_per_minute") {
                c.rate_limit_per_minute = field<int>(j, "rate_limit_per_minute");
            } else if (k == "prebuffer") {
                c.prebuffer = field<std::size_t>(j, "prebuffer");
            } else if (k == "seed") {
                c.seed = field<std::uint64_t>(j, "seed");
            } else if (k == "defaults") {
                apply_defaults(v, c.defaults);
            } else if (k == "overrides") {
                apply_overrides(v, c.overrides);
            } else {
                throw ConfigError("unknown config key '" + k + "'");
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return c;
}

ServiceConfig load_config_file(const std::filesystem::path& path, ServiceConfig base) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream s;
    s << is.rdbuf();
    return parse_config(s.str(), std::move(base));
}

ServiceConfig apply_env(ServiceConfig c, const EnvLookup& lookup) {
    auto get = [&](const char* name) { return lookup(name); };
    try {
        if (auto v = get("CAPTCHASTAR_POOL_DIR")) c.pool_dir = *v;
        if (auto v = get("CAPTCHASTAR_HOST")) c.host = *v;
        if (auto v = get("CAPTCHASTAR_PORT")) c.port = to_int("CAPTCHASTAR_PORT", *v);
        if (auto v = get("CAPTCHASTAR_TTL")) c.ttl_seconds = to_int("CAPTCHASTAR_TTL", *v);
        if (auto v = get("CAPTCHASTAR_ENCODING")) c.encoding = wire::parse_encoding(*v);
        if (auto v = get("CAPTCHASTAR_STATIC_DIR")) c.static_dir = *v;
        if (auto v = get("CAPTCHASTAR_RATE_LIMIT")) c.rate_limit_per_minute = to_int("CAPTCHASTAR_RATE_LIMIT", *v);
        if (auto v = get("CAPTCHASTAR_PREBUFFER")) {
            const int n = to_int("CAPTCHASTAR_PREBUFFER", *v);
            if (n < 0) {
                throw ConfigError("CAPTCHASTAR_PREBUFFER must be non-negative");
            }
            c.prebuffer = static_cast<std::size_t>(n);
        }
        if (auto v = get("CAPTCHASTAR_PSI")) c.defaults.psi = to_double("CAPTCHASTAR_PSI", *v);
        if (auto v = get("CAPTCHASTAR_DELTA")) c.defaults.delta = to_double("CAPTCHASTAR_DELTA", *v);
        if (auto v = get("CAPTCHASTAR_NSOL")) c.defaults.nsol = to_int("CAPTCHASTAR_NSOL", *v);
        if (auto v = get("CAPTCHASTAR_PIC_SIZE")) c.defaults.pic_size = to_int("CAPTCHASTAR_PIC_SIZE", *v);
        if (auto v = get("CAPTCHASTAR_ROTATION")) c.defaults.rotation = to_bool("CAPTCHASTAR_ROTATION", *v);
        if (auto v = get("CAPTCHASTAR_TOLERANCE")) c.defaults.tolerance = to_double("CAPTCHASTAR_TOLERANCE", *v);
        if (auto v = get("CAPTCHASTAR_POLICY")) c.defaults.solution_policy = parse_solution_policy(*v);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return c;
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) {
            return std::string(v);
        }
        return std::nullopt;
    };
}

void check_config(const ServiceConfig& c) {
    if (c.port < 0 || c.port > 65535) {
        throw ConfigError("port must lie in [0, 65535]");
    }
    if (c.ttl_seconds <= 0) {
        throw ConfigError("ttl_seconds must be positive");
    }
    if (c.rate_limit_per_minute < 0) {
        throw ConfigError("rate_limit_per_minute must be non-negative");
    }
    try {
        validate_params(c.defaults);
    } catch (const ParamError& e) {
        throw ConfigError(std::string("defaults: ") + e.what());
    }
}

}  // namespace captchastar::service
