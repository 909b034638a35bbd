#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "captchastar/core.hpp"
#include "captchastar/wire.hpp"

namespace captchastar::service {

/// Limits on per-request parameter overrides.
struct OverridePolicy {
    bool allow = true;
    int max_nsol = 4;
    double max_psi = 400.0;
    double max_delta = 50.0;
};

struct ServiceConfig {
    std::filesystem::path pool_dir;
    std::string host = "0.0.0.0";
    int port = 8080;
    int ttl_seconds = 300;
    GenParams defaults;
    wire::Encoding encoding = wire::Encoding::json;
    std::filesystem::path static_dir;
    int rate_limit_per_minute = 0;  ///< challenges per client per minute; 0 disables
    std::size_t prebuffer = 0;      ///< pre-generated default challenges kept ready
    OverridePolicy overrides;
    std::optional<std::uint64_t> seed;  ///< fixed generation seed, for testing
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Applies the keys of a JSON object onto `base`. Keys: pool_dir, host, port,
/// ttl_seconds, encoding, static_dir, rate_limit_per_minute, prebuffer, seed,
/// defaults {psi, delta, nsol, pic_size, rotation, tolerance, solution_policy},
/// overrides {allow, max_nsol, max_psi, max_delta}. Unknown keys are errors.
ServiceConfig parse_config(const std::string& json_text, ServiceConfig base = {});
ServiceConfig load_config_file(const std::filesystem::path& path, ServiceConfig base = {});

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// CAPTCHASTAR_POOL_DIR, _HOST, _PORT, _TTL, _ENCODING, _STATIC_DIR,
/// _RATE_LIMIT, _PREBUFFER, _PSI, _DELTA, _NSOL, _PIC_SIZE, _ROTATION,
/// _TOLERANCE, _POLICY.
ServiceConfig apply_env(ServiceConfig config, const EnvLookup& lookup);
EnvLookup process_env();

/// Throws ConfigError when a field is out of range.
void check_config(const ServiceConfig& config);

}  // namespace captchastar::service
