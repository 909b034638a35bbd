#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "captchastar/pool.hpp"
#include "captchastar/rng.hpp"
#include "captchastar/service/config.hpp"
#include "captchastar/service/store.hpp"

namespace captchastar::service {

struct HttpReply {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

/// Transport-independent CAPTCHA endpoints. The HTTP layer only maps
/// requests onto create() and verify().
class CaptchaService {
public:
    using Clock = ChallengeStore::Clock;

    CaptchaService(ServiceConfig config, std::shared_ptr<const PicturePool> pool);
    ~CaptchaService();

    CaptchaService(const CaptchaService&) = delete;
    CaptchaService& operator=(const CaptchaService&) = delete;

    /// POST /api/challenge. `body` is empty or a JSON object of parameter
    /// overrides, optionally with "encoding". `client` keys the rate limit.
    HttpReply create(std::string_view body, const std::string& client = "", Clock::time_point now = Clock::now());

    /// GET /api/verify?id=&x=&y=
    HttpReply verify(const QueryParams& query, Clock::time_point now = Clock::now());

    std::size_t sweep(Clock::time_point now = Clock::now()) { return store_.sweep_expired(now); }

    /// Starts the pre-generation worker (when prebuffer > 0) and a periodic
    /// expiry sweep. Stopped by stop() or the destructor.
    void start_background();
    void stop();

    std::size_t buffered() const;

    const ServiceConfig& config() const { return config_; }
    const ChallengeStore& store() const { return store_; }

    /// Called with every challenge just before it is stored, solution
    /// included. Intended for tests and auditing.
    void set_issue_observer(std::function<void(const Challenge&)> observer) { observer_ = std::move(observer); }

private:
    Challenge generate(const GenParams& params);
    bool rate_limited(const std::string& client, Clock::time_point now);
    void prebuffer_loop();
    void sweep_loop();

    ServiceConfig config_;
    std::shared_ptr<const PicturePool> pool_;
    ChallengeStore store_;
    std::function<void(const Challenge&)> observer_;

    std::mutex rng_mutex_;
    Rng seeds_;

    std::mutex rate_mutex_;
    std::map<std::string, std::pair<Clock::time_point, int>> rate_;

    mutable std::mutex buffer_mutex_;
    std::condition_variable buffer_cv_;
    std::deque<Challenge> buffer_;
    bool stopping_ = false;
    std::thread prebuffer_thread_;
    std::thread sweep_thread_;
};

}  // namespace captchastar::service
