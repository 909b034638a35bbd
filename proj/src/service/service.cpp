#include "captchastar/service/service.hpp"

#include <charconv>
#include <random>

#include "captchastar/generator.hpp"
#include "captchastar/wire.hpp"
#include "json.hpp"

namespace captchastar::service {

using nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string& message) {
    return {status, "application/json", json{{"error", message}}.dump()};
}

std::optional<int> parse_int(const std::string& text) {
    int v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) {
        return std::nullopt;
    }
    return v;
}

const std::string* single(const QueryParams& q, const std::string& key) {
    const auto range = q.equal_range(key);
    if (range.first == range.second || std::next(range.first) != range.second) {
        return nullptr;
    }
    return &range.first->second;
}

struct Request {
    GenParams params;
    wire::Encoding encoding;
    bool defaulted = true;
};

Request parse_request(std::string_view body, const ServiceConfig& cfg) {
    Request r{cfg.defaults, cfg.encoding, true};
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        return r;
    }
    json j = json::parse(body);  // parse_error handled by the caller
    if (!j.is_object()) {
        throw ParamError("body", "request body must be a JSON object");
    }
    GenParamsInput in;
    for (const auto& [k, v] : j.items()) {
        auto number = [&](const char* name) {
            if (!v.is_number()) {
                throw ParamError(name, std::string(name) + " must be a number");
            }
            return v.get<double>();
        };
        auto integer = [&](const char* name) {
            if (!v.is_number_integer()) {
                throw ParamError(name, std::string(name) + " must be an integer");
            }
            return v.get<int>();
        };
        if (k == "encoding") {
            if (!v.is_string()) {
                throw ParamError("encoding", "encoding must be a string");
            }
            try {
                r.encoding = wire::parse_encoding(v.get<std::string>());
            } catch (const wire::WireError& e) {
                throw ParamError("encoding", e.what());
            }
            continue;
        }
        r.defaulted = false;
        if (k == "psi") {
            in.psi = number("psi");
        } else if (k == "delta") {
            in.delta = number("delta");
        } else if (k == "nsol") {
            in.nsol = integer("nsol");
        } else if (k == "pic_size") {
            in.pic_size = integer("pic_size");
        } else if (k == "tolerance") {
            in.tolerance = number("tolerance");
        } else if (k == "rotation") {
            if (!v.is_boolean()) {
                throw ParamError("rotation", "rotation must be a boolean");
            }
            in.rotation = v.get<bool>();
        } else if (k == "solution_policy") {
            if (!v.is_string()) {
                throw ParamError("solution_policy", "solution_policy must be a string");
            }
            in.solution_policy = parse_solution_policy(v.get<std::string>());
        } else {
            throw ParamError(k, "unknown parameter '" + k + "'");
        }
    }
    if (!r.defaulted) {
        const OverridePolicy& pol = cfg.overrides;
        if (!pol.allow) {
            throw ParamError("body", "parameter overrides are disabled");
        }
        r.params = validate_params(in, cfg.defaults);
        if (r.params.nsol > pol.max_nsol) {
            throw ParamError("nsol", "nsol exceeds the server limit");
        }
        if (r.params.psi > pol.max_psi) {
            throw ParamError("psi", "psi exceeds the server limit");
        }
        if (r.params.delta > pol.max_delta) {
            throw ParamError("delta", "delta exceeds the server limit");
        }
    }
    return r;
}

const ServiceConfig& checked(const ServiceConfig& c) {
    check_config(c);
    return c;
}

std::uint64_t os_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

CaptchaService::CaptchaService(ServiceConfig config, std::shared_ptr<const PicturePool> pool)
    : config_(checked(config)),
      pool_(std::move(pool)),
      store_(std::chrono::seconds(config_.ttl_seconds)),
      seeds_(config_.seed.value_or(os_seed())) {
    if (!pool_) {
        throw std::invalid_argument("service needs a picture pool");
    }
}

CaptchaService::~CaptchaService() { stop(); }

Challenge CaptchaService::generate(const GenParams& params) {
    std::uint64_t seed = 0;
    {
        std::lock_guard lock(rng_mutex_);
        seed = seeds_.next_u64();
    }
    Rng rng(seed);
    return generate_challenge(params, *pool_, rng);
}

bool CaptchaService::rate_limited(const std::string& client, Clock::time_point now) {
    if (config_.rate_limit_per_minute <= 0) {
        return false;
    }
    std::lock_guard lock(rate_mutex_);
    auto& [window_start, count] = rate_[client];
    if (count == 0 || now - window_start >= std::chrono::minutes(1)) {
        window_start = now;
        count = 0;
    }
    if (count >= config_.rate_limit_per_minute) {
        return true;
    }
    ++count;
    return false;
}

HttpReply CaptchaService::create(std::string_view body, const std::string& client, Clock::time_point now) {
    Request req;
    try {
        req = parse_request(body, config_);
    } catch (const json::exception&) {
        return error_reply(400, "request body is not valid JSON");
    } catch (const ParamError& e) {
        return error_reply(400, e.what());
    }
    if (rate_limited(client, now)) {
        return error_reply(429, "too many challenges requested");
    }
    if (pool_->size() == 0) {
        return error_reply(503, "picture pool is empty");
    }

    std::optional<Challenge> ch;
    if (req.defaulted) {
        std::lock_guard lock(buffer_mutex_);
        if (!buffer_.empty()) {
            ch = std::move(buffer_.front());
            buffer_.pop_front();
            buffer_cv_.notify_all();
        }
    }
    try {
        if (!ch) {
            ch = generate(req.params);
        }
    } catch (const GenerationError& e) {
        return error_reply(503, e.what());
    }
    ch->created_at = now;
    const ClientChallenge view = client_view(*ch);
    if (observer_) {
        observer_(*ch);
    }
    store_.insert(std::move(*ch));

    HttpReply reply;
    if (req.encoding == wire::Encoding::json) {
        reply.body = wire::encode_json(view);
    } else {
        reply.body = json{{"id", view.id}, {"encoding", "binary"},
                          {"stars_b64", wire::base64_encode(wire::encode_binary(view))}}
                         .dump();
    }
    return reply;
}

HttpReply CaptchaService::verify(const QueryParams& query, Clock::time_point now) {
    const std::string* id = single(query, "id");
    const std::string* xs = single(query, "x");
    const std::string* ys = single(query, "y");
    if (id == nullptr || xs == nullptr || ys == nullptr) {
        return error_reply(400, "expected exactly one each of id, x and y");
    }
    const auto x = parse_int(*xs);
    const auto y = parse_int(*ys);
    if (!x || !y) {
        return error_reply(400, "x and y must be integers");
    }
    // Range errors are reported the same way whatever state the id is in.
    if (*x < 0 || *x > DrawableSpace::side || *y < 0 || *y > DrawableSpace::side) {
        return error_reply(400, "answer lies outside the drawable space");
    }
    ChallengeStore::Attempt attempt;
    try {
        attempt = store_.verify(*id, {static_cast<double>(*x), static_cast<double>(*y)}, now);
    } catch (const MalformedAnswer& e) {
        return error_reply(400, e.what());
    }
    if (!attempt.accepted) {
        return error_reply(410, "challenge is unknown, expired or already used");
    }
    const bool ok = attempt.outcome.passed || attempt.outcome.matched;
    return {200, "application/json",
            json{{"result", ok ? "pass" : "fail"}, {"remaining", attempt.outcome.solutions_remaining}}.dump()};
}

void CaptchaService::start_background() {
    std::lock_guard lock(buffer_mutex_);
    stopping_ = false;
    if (config_.prebuffer > 0 && !prebuffer_thread_.joinable() && pool_->size() > 0) {
        prebuffer_thread_ = std::thread([this] { prebuffer_loop(); });
    }
    if (!sweep_thread_.joinable()) {
        sweep_thread_ = std::thread([this] { sweep_loop(); });
    }
}

void CaptchaService::stop() {
    {
        std::lock_guard lock(buffer_mutex_);
        stopping_ = true;
    }
    buffer_cv_.notify_all();
    if (prebuffer_thread_.joinable()) {
        prebuffer_thread_.join();
    }
    if (sweep_thread_.joinable()) {
        sweep_thread_.join();
    }
}

std::size_t CaptchaService::buffered() const {
    std::lock_guard lock(buffer_mutex_);
    return buffer_.size();
}

void CaptchaService::prebuffer_loop() {
    for (;;) {
        {
            std::unique_lock lock(buffer_mutex_);
            buffer_cv_.wait(lock, [this] { return stopping_ || buffer_.size() < config_.prebuffer; });
            if (stopping_) {
                return;
            }
        }
        Challenge ch;
        try {
            ch = generate(config_.defaults);
        } catch (const std::exception&) {
            std::unique_lock lock(buffer_mutex_);
            buffer_cv_.wait_for(lock, std::chrono::seconds(1), [this] { return stopping_; });
            continue;
        }
        std::lock_guard lock(buffer_mutex_);
        buffer_.push_back(std::move(ch));
    }
}

void CaptchaService::sweep_loop() {
    const auto period = std::chrono::seconds(std::max(1, config_.ttl_seconds / 10));
    std::unique_lock lock(buffer_mutex_);
    while (!buffer_cv_.wait_for(lock, period, [this] { return stopping_; })) {
        lock.unlock();
        store_.sweep_expired(Clock::now());
        lock.lock();
    }
}

}  // namespace captchastar::service
