#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "captchastar/generator.hpp"
#include "captchastar/kinematics.hpp"

namespace captchastar::service {

enum class ChallengeStatus { active, passed, failed, expired };

std::string_view to_string(ChallengeStatus s);

/// Issued challenges keyed by id. Every operation takes the store lock, so
/// each id moves out of `active` exactly once even under concurrent verifies.
class ChallengeStore {
public:
    using Clock = std::chrono::steady_clock;

    explicit ChallengeStore(std::chrono::seconds ttl = std::chrono::seconds(300));

    std::chrono::seconds ttl() const { return ttl_; }

    /// Stores an active challenge; its created_at starts the TTL. Throws
    /// std::invalid_argument on a duplicate id.
    void insert(Challenge challenge);

    std::optional<ChallengeStatus> status(const std::string& id) const;

    struct Attempt {
        bool accepted = false;  ///< false: unknown, expired or already consumed
        VerifyOutcome outcome;
    };

    /// Runs verify() on an active, unexpired challenge and applies the
    /// resulting transition. Throws MalformedAnswer without touching state.
    Attempt verify(const std::string& id, Point answer, Clock::time_point now);

    /// Marks active challenges older than the TTL as expired and drops
    /// finished entries older than twice the TTL. Returns the number expired.
    std::size_t sweep_expired(Clock::time_point now);

    std::size_t size() const;
    std::size_t active_count() const;

private:
    struct Entry {
        Challenge challenge;
        VerifyProgress progress;
        ChallengeStatus status = ChallengeStatus::active;
    };

    bool expired(const Entry& e, Clock::time_point now) const;

    std::chrono::seconds ttl_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, Entry> entries_;
};

}  // namespace captchastar::service
